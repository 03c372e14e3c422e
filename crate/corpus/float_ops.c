#include <stdint.h>

typedef union {
  float f;
  uint32_t u;
} fbits;

void float_ops()
{
  uint32_t xb, yb;
  int32_t n;
  C2V_SAMPLE_INPUT(uint32_t, xb);
  C2V_SAMPLE_INPUT(uint32_t, yb);
  C2V_SAMPLE_INPUT(int32_t, n);

  fbits x, y, r;
  x.u = xb;
  y.u = yb;
  float s = x.f + y.f;
  float p = s * 0.5f - (float)n;
  int32_t lt = x.f < y.f;
  int32_t ge = x.f >= y.f;
  int32_t k = (int32_t)p;
  uint32_t uk = (uint32_t)y.f;
  r.f = -p;
  uint32_t res = r.u;
  uint32_t cmp = (uint32_t)lt | ((uint32_t)ge << 1) | ((x.f != x.f) << 2);

  C2V_DRIVE_OUTPUT(uint32_t, res);
  C2V_DRIVE_OUTPUT(int32_t, k);
  C2V_DRIVE_OUTPUT(uint32_t, uk);
  C2V_DRIVE_OUTPUT(uint32_t, cmp);
}
