/* 1-4-3 mini-float adder: subnormals enter alignment unnormalized with
 * exponent 1, and a clamped corrective shift normalizes the sum. */
#include <stdint.h>

typedef struct {
  uint8_t sign;
  uint8_t exp;
  uint8_t frac;
} mf_parts;

typedef union {
  uint8_t bits;
  struct { uint8_t raw; } view;
} mf_word;

static mf_parts unpack(uint8_t v)
{
  mf_parts p;
  p.sign = v >> 7;
  p.exp = (v >> 3) & 0xF;
  p.frac = v & 7;
  return p;
}

static uint32_t shift_right_jam(uint32_t a, uint32_t dist)
{
  if (dist == 0) return a;
  if (dist < 31) return (a >> dist) | ((a << (32 - dist)) != 0);
  return a != 0;
}

static uint32_t lz7(uint32_t s)
{
  uint32_t n = 0;
  if ((s & 0x78) == 0) { n += 4; s <<= 4; }
  if ((s & 0x60) == 0) { n += 2; s <<= 2; }
  if ((s & 0x40) == 0) { n += 1; }
  return n;
}

static void add_parts(const mf_parts *x, const mf_parts *y, mf_word *out)
{
  const mf_parts *big = x, *small = y;
  uint32_t sigx = x->exp ? (x->frac | 8u) : x->frac;
  uint32_t sigy = y->exp ? (y->frac | 8u) : y->frac;
  int32_t ex = x->exp ? x->exp : 1;
  int32_t ey = y->exp ? y->exp : 1;
  uint32_t magx = ((uint32_t)ex << 4) | sigx;
  uint32_t magy = ((uint32_t)ey << 4) | sigy;
  uint32_t sbig = sigx, ssmall = sigy;
  int32_t ebig = ex, esmall = ey;

  if (magy > magx) {
    big = y;
    small = x;
    sbig = sigy;
    ssmall = sigx;
    ebig = ey;
    esmall = ex;
  }

  uint32_t A = sbig << 3;
  uint32_t B = shift_right_jam(ssmall << 3, (uint32_t)(ebig - esmall));
  uint32_t S = big->sign == small->sign ? A + B : A - B;
  uint32_t sign = big->sign;
  int32_t e = ebig;

  if (S == 0) {
    out->bits = 0;
    return;
  }
  if (S & 0x80) {
    S = shift_right_jam(S, 1);
    e += 1;
  } else {
    int32_t sh = (int32_t)lz7(S);
    if (e - sh < 1) sh = e - 1;
    S <<= sh;
    e -= sh;
  }

  uint32_t rb = S & 7;
  S = S >> 3;
  if (rb > 4 || (rb == 4 && (S & 1))) S += 1;
  if (S & 0x10) {
    S >>= 1;
    e += 1;
  }
  if (e >= 15) {
    out->bits = (uint8_t)((sign << 7) | 0x78);
    return;
  }
  if (!(S & 8)) e = 0;
  out->view.raw = (uint8_t)((sign << 7) | ((uint32_t)e << 3) | (S & 7));
}

static uint8_t mf_add(uint8_t a, uint8_t b)
{
  mf_parts pa = unpack(a), pb = unpack(b);
  mf_word w;
  int a_nan = pa.exp == 15 && pa.frac != 0;
  int b_nan = pb.exp == 15 && pb.frac != 0;

  if (a_nan || b_nan) return 0x7C;
  if (pa.exp == 15 || pb.exp == 15) {
    if (pa.exp == 15 && pb.exp == 15 && pa.sign != pb.sign) return 0x7C;
    return pa.exp == 15 ? a : b;
  }
  if ((a & 0x7F) == 0 && (b & 0x7F) == 0) return a & b;
  if ((a & 0x7F) == 0) return b;
  if ((b & 0x7F) == 0) return a;

  add_parts(&pa, &pb, &w);
  return w.bits;
}

void mf_add_shift()
{
  uint8_t a, b;
  C2V_SAMPLE_INPUT(uint8_t, a);
  C2V_SAMPLE_INPUT(uint8_t, b);
  uint8_t res = mf_add(a, b);
  C2V_DRIVE_OUTPUT(uint8_t, res);
}
