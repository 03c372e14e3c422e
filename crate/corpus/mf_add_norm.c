/* 1-4-3 mini-float adder: subnormal operands are normalized before
 * alignment, and the result is denormalized before rounding. */
#include <stdint.h>

#define MF_NAN 0x7C
#define MF_BIAS 7
#define GUARD 3

static uint32_t jam(uint32_t a, int32_t dist)
{
  if (dist <= 0) return a;
  if (dist >= 31) return a != 0;
  return (a >> dist) | ((a & ((1u << dist) - 1)) != 0);
}

static uint8_t mf_add(uint8_t a, uint8_t b)
{
  uint32_t sa = a >> 7, sb = b >> 7;
  int32_t ea = (a >> 3) & 0xF, eb = (b >> 3) & 0xF;
  uint32_t fa = a & 7, fb = b & 7;
  int k;

  if ((ea == 15 && fa) || (eb == 15 && fb)) return MF_NAN;
  if (ea == 15 && eb == 15) return sa == sb ? a : MF_NAN;
  if (ea == 15) return a;
  if (eb == 15) return b;
  if (ea == 0 && fa == 0 && eb == 0 && fb == 0) return (uint8_t)((sa & sb) << 7);
  if (ea == 0 && fa == 0) return b;
  if (eb == 0 && fb == 0) return a;

  uint32_t ma = fa, mb = fb;
  if (ea == 0) {
    ea = 1;
    for (k = 0; k < 3; k++)
      if (!(ma & 8)) { ma <<= 1; ea--; }
  } else {
    ma |= 8;
  }
  if (eb == 0) {
    eb = 1;
    for (k = 0; k < 3; k++)
      if (!(mb & 8)) { mb <<= 1; eb--; }
  } else {
    mb |= 8;
  }

  if (eb > ea) {
    uint32_t ts = sa; sa = sb; sb = ts;
    int32_t te = ea; ea = eb; eb = te;
    uint32_t tm = ma; ma = mb; mb = tm;
  }
  uint32_t A = ma << GUARD;
  uint32_t B = jam(mb << GUARD, ea - eb);
  uint32_t S, sign;
  int32_t ex = ea;
  if (sa == sb) {
    S = A + B;
    sign = sa;
  } else if (A >= B) {
    S = A - B;
    sign = sa;
  } else {
    S = B - A;
    sign = sb;
  }
  if (S == 0) return 0;

  if (S >= 128) {
    S = jam(S, 1);
    ex++;
  }
  for (k = 0; k < 6; k++)
    if (S < 64) { S <<= 1; ex--; }

  if (ex < 1) {
    S = jam(S, 1 - ex);
    ex = 1;
  }

  uint32_t rb = S & 7;
  S >>= 3;
#ifdef MF_ROUND_BUG
  if (rb > 4 || (rb == 4 && !(S & 1))) S++;
#else
  if (rb > 4 || (rb == 4 && (S & 1))) S++;
#endif
  if (S == 16) {
    S = 8;
    ex++;
  }
  if (ex >= 15) return (uint8_t)((sign << 7) | 0x78);
  uint32_t field = S & 8 ? (uint32_t)ex : 0;
  return (uint8_t)((sign << 7) | (field << 3) | (S & 7));
}

void mf_add_norm()
{
  uint8_t a, b;
  C2V_SAMPLE_INPUT(uint8_t, a);
  C2V_SAMPLE_INPUT(uint8_t, b);
  uint8_t res = mf_add(a, b);
  C2V_DRIVE_OUTPUT(uint8_t, res);
}
