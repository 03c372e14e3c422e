#include <stdint.h>

void sum_loop()
{
  uint32_t s = 0;
  uint32_t i;
  for (i = 0; i < 4; i++)
    s += i;
  C2V_DRIVE_OUTPUT(uint32_t, s);
}
