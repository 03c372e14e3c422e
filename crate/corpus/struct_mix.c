#include <stdint.h>

struct inner {
  uint8_t tag;
  union {
    struct { uint16_t lo, hi; } w;
    uint32_t all;
  } u;
};

struct outer {
  struct inner items[3];
  int32_t count;
};

enum mode { MODE_DIV, MODE_REM, MODE_SHR, MODE_SHL };

static void accumulate(struct outer *o, uint32_t v, int idx)
{
  struct inner *it = &o->items[idx];
  it->u.all = v;
  it->tag = (uint8_t)idx;
  o->count++;
}

static uint32_t classify(uint32_t v, int8_t c)
{
  switch (v & 3) {
  case MODE_DIV:
    return v / 3;
  case MODE_REM:
    return v % 7;
  case MODE_SHR: {
    int32_t s = (int32_t)v;
    return (uint32_t)(s >> (c & 15));
  }
  default:
    break;
  }
  return v << (v & 7);
}

void struct_mix()
{
  uint32_t a, b;
  int8_t c;
  C2V_SAMPLE_INPUT(uint32_t, a);
  C2V_SAMPLE_INPUT(uint32_t, b);
  C2V_SAMPLE_INPUT(int8_t, c);

  struct outer o;
  int i;
  o.count = 0;
  for (i = 0; i < 3; i++)
    accumulate(&o, a + (uint32_t)i * b, i);

  uint32_t mix = o.items[1].u.w.hi ^ o.items[2].u.w.lo ^ o.items[o.count - 1].tag;
  uint32_t q = b ? a / b : 0;
  int32_t d = (int32_t)a / c;
  int64_t wide = (int64_t)c * a;
  uint64_t span = (uint64_t)&o.items[2] - (uint64_t)&o.items[0];

  uint32_t *pp = c < 0 ? &a : &b;
  *pp += 1;

  uint32_t acc = 0;
  uint32_t n = 0;
  do {
    n++;
    if (n == 2) continue;
    if ((a >> n) & 1) break;
    acc += classify(a ^ (b << n), c);
  } while (n < 5);

  int16_t neg = -(int16_t)c;
  uint8_t wrap = (uint8_t)(200 + 100);
  uint32_t res = mix + q + (uint32_t)d + (uint32_t)wide + (uint32_t)(wide >> 32) + acc;
  uint32_t flags = (uint32_t)span | ((uint32_t)neg << 8) | ((uint32_t)wrap << 24) | ((a == b) << 31);

  C2V_DRIVE_OUTPUT(uint32_t, res);
  C2V_DRIVE_OUTPUT(uint32_t, flags);
  uint32_t a_out = a, b_out = b;
  C2V_DRIVE_OUTPUT(uint32_t, a_out);
  C2V_DRIVE_OUTPUT(uint32_t, b_out);
}
