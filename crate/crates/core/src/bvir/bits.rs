//! Fixed-width bit patterns with two's-complement operator semantics.

use std::cmp::Ordering;
use std::fmt;

pub const MAX_WIDTH: u32 = 512;
const WORDS: usize = (MAX_WIDTH as usize) / 64;

/// A bit pattern of `width` bits (1..=512). Bits above `width` are always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bits {
    width: u32,
    words: [u64; WORDS],
}

fn nwords(width: u32) -> usize {
    width.div_ceil(64) as usize
}

impl Bits {
    pub fn zero(width: u32) -> Self {
        assert!((1..=MAX_WIDTH).contains(&width), "width {width} out of range");
        Bits { width, words: [0; WORDS] }
    }

    pub fn ones(width: u32) -> Self {
        let mut b = Bits::zero(width);
        for w in b.words.iter_mut().take(nwords(width)) {
            *w = u64::MAX;
        }
        b.masked()
    }

    pub fn from_u64(width: u32, value: u64) -> Self {
        let mut b = Bits::zero(width);
        b.words[0] = value;
        b.masked()
    }

    pub fn from_bool(v: bool) -> Self {
        Bits::from_u64(1, v as u64)
    }

    /// Builds from little-endian 64-bit words; excess bits are dropped.
    pub fn from_words(width: u32, words: &[u64]) -> Self {
        let mut b = Bits::zero(width);
        for (dst, src) in b.words.iter_mut().zip(words).take(nwords(width)) {
            *dst = *src;
        }
        b.masked()
    }

    /// Builds from little-endian bytes (byte k holds bits 8k+7..8k).
    pub fn from_le_bytes(width: u32, bytes: &[u8]) -> Self {
        let mut b = Bits::zero(width);
        for (k, byte) in bytes.iter().enumerate().take(width.div_ceil(8) as usize) {
            b.words[k / 8] |= (*byte as u64) << (8 * (k % 8));
        }
        b.masked()
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        (0..self.width.div_ceil(8) as usize)
            .map(|k| (self.words[k / 8] >> (8 * (k % 8))) as u8)
            .collect()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn words(&self) -> &[u64] {
        &self.words[..nwords(self.width)]
    }

    /// Low 64 bits.
    pub fn to_u64(&self) -> u64 {
        self.words[0]
    }

    pub fn fits_u64(&self) -> bool {
        self.words[1..].iter().all(|w| *w == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_ones(&self) -> bool {
        *self == Bits::ones(self.width)
    }

    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i < self.width);
        (self.words[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, i: u32, v: bool) {
        let (w, s) = ((i / 64) as usize, i % 64);
        if v {
            self.words[w] |= 1 << s;
        } else {
            self.words[w] &= !(1 << s);
        }
    }

    pub fn sign(&self) -> bool {
        self.bit(self.width - 1)
    }

    fn masked(mut self) -> Self {
        let n = nwords(self.width);
        for w in self.words.iter_mut().skip(n) {
            *w = 0;
        }
        let rem = self.width % 64;
        if rem != 0 {
            self.words[n - 1] &= (1u64 << rem) - 1;
        }
        self
    }

    fn small(&self) -> bool {
        self.width <= 64
    }

    fn same(&self, other: &Bits) {
        debug_assert_eq!(self.width, other.width, "operand widths differ");
    }

    pub fn not(&self) -> Bits {
        let mut r = *self;
        for w in r.words.iter_mut() {
            *w = !*w;
        }
        r.masked()
    }

    pub fn and(&self, o: &Bits) -> Bits {
        self.same(o);
        let mut r = *self;
        for (a, b) in r.words.iter_mut().zip(o.words.iter()) {
            *a &= *b;
        }
        r
    }

    pub fn or(&self, o: &Bits) -> Bits {
        self.same(o);
        let mut r = *self;
        for (a, b) in r.words.iter_mut().zip(o.words.iter()) {
            *a |= *b;
        }
        r
    }

    pub fn xor(&self, o: &Bits) -> Bits {
        self.same(o);
        let mut r = *self;
        for (a, b) in r.words.iter_mut().zip(o.words.iter()) {
            *a ^= *b;
        }
        r
    }

    pub fn add(&self, o: &Bits) -> Bits {
        self.same(o);
        if self.small() {
            return Bits::from_u64(self.width, self.words[0].wrapping_add(o.words[0]));
        }
        let mut r = Bits::zero(self.width);
        let mut carry = false;
        for i in 0..nwords(self.width) {
            let (s1, c1) = self.words[i].overflowing_add(o.words[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            r.words[i] = s2;
            carry = c1 || c2;
        }
        r.masked()
    }

    pub fn neg(&self) -> Bits {
        self.not().add(&Bits::from_u64(self.width, 1))
    }

    pub fn sub(&self, o: &Bits) -> Bits {
        if self.small() {
            return Bits::from_u64(self.width, self.words[0].wrapping_sub(o.words[0]));
        }
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Bits) -> Bits {
        self.same(o);
        if self.small() {
            return Bits::from_u64(self.width, self.words[0].wrapping_mul(o.words[0]));
        }
        let n = nwords(self.width);
        let mut acc = [0u64; WORDS];
        for i in 0..n {
            let mut carry: u128 = 0;
            for j in 0..(n - i) {
                let cur = acc[i + j] as u128 + (self.words[i] as u128) * (o.words[j] as u128) + carry;
                acc[i + j] = cur as u64;
                carry = cur >> 64;
            }
        }
        Bits { width: self.width, words: acc }.masked()
    }

    pub fn ult(&self, o: &Bits) -> bool {
        self.same(o);
        self.cmp_unsigned(o) == Ordering::Less
    }

    pub fn ule(&self, o: &Bits) -> bool {
        self.cmp_unsigned(o) != Ordering::Greater
    }

    pub fn slt(&self, o: &Bits) -> bool {
        match (self.sign(), o.sign()) {
            (true, false) => true,
            (false, true) => false,
            _ => self.ult(o),
        }
    }

    pub fn sle(&self, o: &Bits) -> bool {
        self == o || self.slt(o)
    }

    pub fn cmp_unsigned(&self, o: &Bits) -> Ordering {
        for i in (0..WORDS).rev() {
            match self.words[i].cmp(&o.words[i]) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    /// Unsigned quotient and remainder; division by zero yields
    /// (all-ones, dividend).
    pub fn udivrem(&self, o: &Bits) -> (Bits, Bits) {
        self.same(o);
        if o.is_zero() {
            return (Bits::ones(self.width), *self);
        }
        if self.small() {
            let (a, b) = (self.words[0], o.words[0]);
            return (Bits::from_u64(self.width, a / b), Bits::from_u64(self.width, a % b));
        }
        let mut q = Bits::zero(self.width);
        let mut r = Bits::zero(self.width);
        for i in (0..self.width).rev() {
            // r may exceed width-1 bits only transiently; r < o always holds here
            let top = r.sign();
            r = r.shl_const(1);
            r.set_bit(0, self.bit(i));
            if top || !r.ult(o) {
                r = r.sub(o);
                q.set_bit(i, true);
            }
        }
        (q, r)
    }

    pub fn udiv(&self, o: &Bits) -> Bits {
        self.udivrem(o).0
    }

    pub fn urem(&self, o: &Bits) -> Bits {
        self.udivrem(o).1
    }

    fn abs(&self) -> Bits {
        if self.sign() {
            self.neg()
        } else {
            *self
        }
    }

    /// Signed division truncating toward zero; x / 0 = -1.
    pub fn sdiv(&self, o: &Bits) -> Bits {
        if o.is_zero() {
            return Bits::ones(self.width);
        }
        let q = self.abs().udiv(&o.abs());
        if self.sign() != o.sign() {
            q.neg()
        } else {
            q
        }
    }

    /// Signed remainder with the dividend's sign; x % 0 = x.
    pub fn srem(&self, o: &Bits) -> Bits {
        if o.is_zero() {
            return *self;
        }
        let r = self.abs().urem(&o.abs());
        if self.sign() {
            r.neg()
        } else {
            r
        }
    }

    /// Shift amount as a plain integer, saturated at `width`.
    fn amount(&self, width: u32) -> u32 {
        if !self.fits_u64() || self.words[0] >= width as u64 {
            width
        } else {
            self.words[0] as u32
        }
    }

    pub fn shl_const(&self, k: u32) -> Bits {
        if k >= self.width {
            return Bits::zero(self.width);
        }
        if self.small() {
            return Bits::from_u64(self.width, self.words[0] << k);
        }
        let (ws, bs) = ((k / 64) as usize, k % 64);
        let mut r = Bits::zero(self.width);
        for i in (ws..WORDS).rev() {
            let mut v = self.words[i - ws] << bs;
            if bs != 0 && i > ws {
                v |= self.words[i - ws - 1] >> (64 - bs);
            }
            r.words[i] = v;
        }
        r.masked()
    }

    pub fn lshr_const(&self, k: u32) -> Bits {
        if k >= self.width {
            return Bits::zero(self.width);
        }
        if self.small() {
            return Bits::from_u64(self.width, self.words[0] >> k);
        }
        let (ws, bs) = ((k / 64) as usize, k % 64);
        let mut r = Bits::zero(self.width);
        for i in 0..(WORDS - ws) {
            let mut v = self.words[i + ws] >> bs;
            if bs != 0 && i + ws + 1 < WORDS {
                v |= self.words[i + ws + 1] << (64 - bs);
            }
            r.words[i] = v;
        }
        r
    }

    pub fn shl(&self, amt: &Bits) -> Bits {
        self.shl_const(amt.amount(self.width))
    }

    pub fn lshr(&self, amt: &Bits) -> Bits {
        self.lshr_const(amt.amount(self.width))
    }

    pub fn ashr(&self, amt: &Bits) -> Bits {
        let k = amt.amount(self.width);
        if !self.sign() {
            return self.lshr_const(k);
        }
        // shift of the complement keeps the fill bits at one
        self.not().lshr_const(k).not()
    }

    /// Bits `hi..=lo`.
    pub fn extract(&self, hi: u32, lo: u32) -> Bits {
        debug_assert!(lo <= hi && hi < self.width);
        let shifted = self.lshr_const(lo);
        Bits::from_words(hi - lo + 1, &shifted.words)
    }

    /// `self` becomes the high part, `lo` the low part.
    pub fn concat(&self, lo: &Bits) -> Bits {
        let width = self.width + lo.width;
        let mut r = Bits::from_words(width, &self.words).shl_const(lo.width);
        for (a, b) in r.words.iter_mut().zip(lo.words.iter()) {
            *a |= *b;
        }
        r
    }

    pub fn zext(&self, width: u32) -> Bits {
        debug_assert!(width >= self.width);
        Bits::from_words(width, &self.words)
    }

    pub fn sext(&self, width: u32) -> Bits {
        let z = self.zext(width);
        if self.sign() && width > self.width {
            let fill = Bits::ones(width).shl_const(self.width);
            z.or(&fill)
        } else {
            z
        }
    }

    /// Truncates or extends to `width`, sign-extending when `signed`.
    pub fn resize(&self, width: u32, signed: bool) -> Bits {
        if width <= self.width {
            self.extract(width - 1, 0)
        } else if signed {
            self.sext(width)
        } else {
            self.zext(width)
        }
    }

    /// Hex digits without prefix, zero-padded to the width.
    pub fn to_hex(&self) -> String {
        let digits = self.width.div_ceil(4) as usize;
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = (d * 4) as u32;
            let nib = (self.words[(bit / 64) as usize] >> (bit % 64)) & 0xF;
            s.push(std::char::from_digit(nib as u32, 16).unwrap().to_ascii_uppercase());
        }
        s
    }

    /// Parses hex digits (underscores allowed), truncating to `width`.
    pub fn from_hex(width: u32, text: &str) -> Option<Bits> {
        let mut acc = Bits::zero(MAX_WIDTH);
        let mut any = false;
        for c in text.chars() {
            if c == '_' {
                continue;
            }
            let d = c.to_digit(16)?;
            any = true;
            acc = acc.shl_const(4);
            acc.words[0] |= d as u64;
        }
        any.then(|| Bits::from_words(width, &acc.words))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}'h{}", self.width, self.to_hex())
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}
