typedef signed char int8_t;
typedef short int16_t;
typedef int int32_t;
typedef long long int64_t;
typedef unsigned char uint8_t;
typedef unsigned short uint16_t;
typedef unsigned int uint32_t;
typedef unsigned long long uint64_t;
typedef long intptr_t;
typedef unsigned long uintptr_t;
typedef unsigned long size_t;

typedef struct { uint32_t v; } float32_t;

static uint32_t c2v_clz32(uint32_t a)
{
    uint32_t n = 0;
    if (a == 0) return 32;
    if ((a & 0xFFFF0000u) == 0) { n += 16; a <<= 16; }
    if ((a & 0xFF000000u) == 0) { n += 8; a <<= 8; }
    if ((a & 0xF0000000u) == 0) { n += 4; a <<= 4; }
    if ((a & 0xC0000000u) == 0) { n += 2; a <<= 2; }
    if ((a & 0x80000000u) == 0) { n += 1; }
    return n;
}

static uint32_t c2v_shift_right_jam32(uint32_t a, uint32_t dist)
{
    if (dist == 0) return a;
    if (dist < 31) return (a >> dist) | ((a << (32 - dist)) != 0);
    return a != 0;
}

static uint32_t c2v_round_pack(uint32_t sign, int32_t exp, uint32_t sig)
{
    uint32_t roundBits = sig & 0x7F;
    if (0xFD <= (uint32_t)exp) {
        if (exp < 0) {
            sig = c2v_shift_right_jam32(sig, (uint32_t)(-exp));
            exp = 0;
            roundBits = sig & 0x7F;
        } else if (0xFD < exp || 0x80000000u <= sig + 0x40) {
            return (sign << 31) | 0x7F800000u;
        }
    }
    sig = (sig + 0x40) >> 7;
    if (roundBits == 0x40) sig &= ~1u;
    if (sig == 0) exp = 0;
    return (sign << 31) + ((uint32_t)exp << 23) + sig;
}

static uint32_t c2v_norm_round_pack(uint32_t sign, int32_t exp, uint32_t sig)
{
    int32_t shift = (int32_t)c2v_clz32(sig) - 1;
    exp -= shift;
    if (7 <= shift && (uint32_t)exp < 0xFD) {
        return (sign << 31) + ((uint32_t)(sig ? exp : 0) << 23) + (sig << (shift - 7));
    }
    return c2v_round_pack(sign, exp, sig << shift);
}

static uint32_t c2v_add_mags(uint32_t a, uint32_t b)
{
    int32_t expA = (a >> 23) & 0xFF;
    uint32_t sigA = a & 0x007FFFFF;
    int32_t expB = (b >> 23) & 0xFF;
    uint32_t sigB = b & 0x007FFFFF;
    int32_t expDiff = expA - expB;
    uint32_t signZ = a >> 31;
    int32_t expZ;
    uint32_t sigZ;
    if (expDiff == 0) {
        if (expA == 0) return a + sigB;
        if (expA == 0xFF) {
            if (sigA | sigB) return 0x7FC00000u;
            return a;
        }
        expZ = expA;
        sigZ = 0x01000000 + sigA + sigB;
        if (!(sigZ & 1) && expZ < 0xFE) {
            return (signZ << 31) + ((uint32_t)expZ << 23) + (sigZ >> 1);
        }
        sigZ <<= 6;
    } else {
        sigA <<= 6;
        sigB <<= 6;
        if (expDiff < 0) {
            if (expB == 0xFF) {
                if (sigB) return 0x7FC00000u;
                return (signZ << 31) | 0x7F800000u;
            }
            expZ = expB;
            sigA += expA ? 0x20000000 : sigA;
            sigA = c2v_shift_right_jam32(sigA, (uint32_t)(-expDiff));
        } else {
            if (expA == 0xFF) {
                if (sigA) return 0x7FC00000u;
                return a;
            }
            expZ = expA;
            sigB += expB ? 0x20000000 : sigB;
            sigB = c2v_shift_right_jam32(sigB, (uint32_t)expDiff);
        }
        sigZ = 0x20000000 + sigA + sigB;
        if (sigZ < 0x40000000) {
            --expZ;
            sigZ <<= 1;
        }
    }
    return c2v_round_pack(signZ, expZ, sigZ);
}

static uint32_t c2v_sub_mags(uint32_t a, uint32_t b)
{
    int32_t expA = (a >> 23) & 0xFF;
    uint32_t sigA = a & 0x007FFFFF;
    int32_t expB = (b >> 23) & 0xFF;
    uint32_t sigB = b & 0x007FFFFF;
    int32_t expDiff = expA - expB;
    uint32_t signZ = a >> 31;
    int32_t expZ;
    uint32_t sigX;
    uint32_t sigY;
    if (expDiff == 0) {
        int32_t sigDiff;
        int32_t shiftDist;
        if (expA == 0xFF) return 0x7FC00000u;
        sigDiff = (int32_t)sigA - (int32_t)sigB;
        if (sigDiff == 0) return 0;
        if (expA) --expA;
        if (sigDiff < 0) {
            signZ = !signZ;
            sigDiff = -sigDiff;
        }
        shiftDist = (int32_t)c2v_clz32((uint32_t)sigDiff) - 8;
        expZ = expA - shiftDist;
        if (expZ < 0) {
            shiftDist = expA;
            expZ = 0;
        }
        return (signZ << 31) + ((uint32_t)expZ << 23) + ((uint32_t)sigDiff << shiftDist);
    }
    sigA <<= 7;
    sigB <<= 7;
    if (expDiff < 0) {
        signZ = !signZ;
        if (expB == 0xFF) {
            if (sigB) return 0x7FC00000u;
            return (signZ << 31) | 0x7F800000u;
        }
        expZ = expB - 1;
        sigX = sigB | 0x40000000;
        sigY = sigA + (expA ? 0x40000000 : sigA);
        expDiff = -expDiff;
    } else {
        if (expA == 0xFF) {
            if (sigA) return 0x7FC00000u;
            return a;
        }
        expZ = expA - 1;
        sigX = sigA | 0x40000000;
        sigY = sigB + (expB ? 0x40000000 : sigB);
    }
    return c2v_norm_round_pack(signZ, expZ, sigX - c2v_shift_right_jam32(sigY, (uint32_t)expDiff));
}

uint32_t c2v_f32_add(uint32_t a, uint32_t b)
{
    if ((a ^ b) >> 31) return c2v_sub_mags(a, b);
    return c2v_add_mags(a, b);
}

uint32_t c2v_f32_sub(uint32_t a, uint32_t b)
{
    if ((a ^ b) >> 31) return c2v_add_mags(a, b ^ 0x80000000u);
    return c2v_sub_mags(a, b ^ 0x80000000u);
}

uint32_t c2v_f32_mul(uint32_t a, uint32_t b)
{
    int32_t expA = (a >> 23) & 0xFF;
    uint32_t sigA = a & 0x007FFFFF;
    int32_t expB = (b >> 23) & 0xFF;
    uint32_t sigB = b & 0x007FFFFF;
    uint32_t signZ = (a ^ b) >> 31;
    int32_t expZ;
    uint32_t sigZ;
    uint64_t prod;
    if (expA == 0xFF) {
        if (sigA || (expB == 0xFF && sigB)) return 0x7FC00000u;
        if (((uint32_t)expB | sigB) == 0) return 0x7FC00000u;
        return (signZ << 31) | 0x7F800000u;
    }
    if (expB == 0xFF) {
        if (sigB) return 0x7FC00000u;
        if (((uint32_t)expA | sigA) == 0) return 0x7FC00000u;
        return (signZ << 31) | 0x7F800000u;
    }
    if (expA == 0) {
        int32_t shiftA;
        if (sigA == 0) return signZ << 31;
        shiftA = (int32_t)c2v_clz32(sigA) - 8;
        expA = 1 - shiftA;
        sigA <<= shiftA;
    }
    if (expB == 0) {
        int32_t shiftB;
        if (sigB == 0) return signZ << 31;
        shiftB = (int32_t)c2v_clz32(sigB) - 8;
        expB = 1 - shiftB;
        sigB <<= shiftB;
    }
    expZ = expA + expB - 0x7F;
    sigA = (sigA | 0x00800000) << 7;
    sigB = (sigB | 0x00800000) << 8;
    prod = (uint64_t)sigA * sigB;
    sigZ = (uint32_t)(prod >> 32) | ((uint32_t)prod != 0);
    if (sigZ < 0x40000000) {
        --expZ;
        sigZ <<= 1;
    }
    return c2v_round_pack(signZ, expZ, sigZ);
}

uint32_t c2v_i32_to_f32(int32_t a)
{
    uint32_t sign = a < 0;
    uint32_t absA;
    if (!(a & 0x7FFFFFFF)) return sign ? 0xCF000000u : 0;
    absA = sign ? -(uint32_t)a : (uint32_t)a;
    return c2v_norm_round_pack(sign, 0x9C, absA);
}

uint32_t c2v_u32_to_f32(uint32_t a)
{
    if (a == 0) return 0;
    if (a & 0x80000000u) return c2v_round_pack(0, 0x9D, (a >> 1) | (a & 1));
    return c2v_norm_round_pack(0, 0x9C, a);
}

int32_t c2v_f32_to_i32(uint32_t a)
{
    int32_t exp = (a >> 23) & 0xFF;
    uint32_t sig = (a & 0x007FFFFF) | 0x00800000;
    int32_t shift = exp - 0x7F;
    uint32_t mag;
    if (exp == 0xFF || shift >= 31) return (int32_t)0x80000000u;
    if (shift < 0) return 0;
    if (shift >= 23) mag = sig << (shift - 23);
    else mag = sig >> (23 - shift);
    if (a >> 31) return (int32_t)(0 - mag);
    return (int32_t)mag;
}

uint32_t c2v_f32_to_u32(uint32_t a)
{
    int32_t exp = (a >> 23) & 0xFF;
    uint32_t sig = (a & 0x007FFFFF) | 0x00800000;
    int32_t shift = exp - 0x7F;
    if (shift < 0 && exp != 0xFF) return 0;
    if (exp == 0xFF || shift >= 32 || (a >> 31)) return 0x80000000u;
    if (shift >= 23) return sig << (shift - 23);
    return sig >> (23 - shift);
}

static int c2v_f32_is_nan(uint32_t a)
{
    return (a & 0x7F800000u) == 0x7F800000u && (a & 0x007FFFFF) != 0;
}

int c2v_f32_eq(uint32_t a, uint32_t b)
{
    if (c2v_f32_is_nan(a) || c2v_f32_is_nan(b)) return 0;
    return a == b || ((a | b) << 1) == 0;
}

int c2v_f32_lt(uint32_t a, uint32_t b)
{
    uint32_t signA = a >> 31;
    uint32_t signB = b >> 31;
    if (c2v_f32_is_nan(a) || c2v_f32_is_nan(b)) return 0;
    if (signA != signB) return signA && ((a | b) << 1) != 0;
    return a != b && (signA ^ (a < b));
}

int c2v_f32_le(uint32_t a, uint32_t b)
{
    uint32_t signA = a >> 31;
    uint32_t signB = b >> 31;
    if (c2v_f32_is_nan(a) || c2v_f32_is_nan(b)) return 0;
    if (signA != signB) return signA || ((a | b) << 1) == 0;
    return a == b || (signA ^ (a < b));
}

uint32_t c2v_f32_neg(uint32_t a)
{
    return a ^ 0x80000000u;
}

float32_t f32_add(float32_t a, float32_t b)
{
    float32_t z;
    z.v = c2v_f32_add(a.v, b.v);
    return z;
}

float32_t f32_sub(float32_t a, float32_t b)
{
    float32_t z;
    z.v = c2v_f32_sub(a.v, b.v);
    return z;
}

float32_t f32_mul(float32_t a, float32_t b)
{
    float32_t z;
    z.v = c2v_f32_mul(a.v, b.v);
    return z;
}

float32_t i32_to_f32(int32_t a)
{
    float32_t z;
    z.v = c2v_i32_to_f32(a);
    return z;
}

float32_t ui32_to_f32(uint32_t a)
{
    float32_t z;
    z.v = c2v_u32_to_f32(a);
    return z;
}

int32_t f32_to_i32_r_minMag(float32_t a, int exact)
{
    return c2v_f32_to_i32(a.v);
}

int f32_eq(float32_t a, float32_t b)
{
    return c2v_f32_eq(a.v, b.v);
}

int f32_lt(float32_t a, float32_t b)
{
    return c2v_f32_lt(a.v, b.v);
}

int f32_le(float32_t a, float32_t b)
{
    return c2v_f32_le(a.v, b.v);
}
