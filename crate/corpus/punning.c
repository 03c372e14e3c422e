#include <stdint.h>

void punning()
{
  float x;
  C2V_SAMPLE_INPUT(uint32_t, x);

  int *xp = (int*)&x;
  *xp = *xp & 0x003fffff;

  uint32_t res = *(uint32_t *)&x;
  C2V_DRIVE_OUTPUT(uint32_t, res);
}
