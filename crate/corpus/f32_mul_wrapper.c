#include <SoftFloat.h>
void f32_mul_wrapper()
{
  uint32_t x, y;
  C2V_SAMPLE_INPUT(uint32_t, x);
  C2V_SAMPLE_INPUT(uint32_t, y);

  float32_t xf, yf, rf;
  xf.v = x;
  yf.v = y;
  rf = f32_mul(xf, yf);
  uint32_t res = rf.v;

  C2V_DRIVE_OUTPUT(uint32_t, res);
}
