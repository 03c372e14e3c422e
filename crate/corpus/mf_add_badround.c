#define MF_ROUND_BUG 1
#include "mf_add_norm.c"
