//! Bundled C-lite sources: the soft-float prelude and virtual system
//! headers.

/// IEEE binary32 arithmetic written in the accepted C subset. Every
/// translation unit is compiled together with it.
pub const SOFTFLOAT_SOURCE: &str = include_str!("prelude/softfloat.c");

pub const SOFTFLOAT_FILE: &str = "softfloat.c";

/// Helper functions float operators lower to.
pub const F32_ADD: &str = "c2v_f32_add";
pub const F32_SUB: &str = "c2v_f32_sub";
pub const F32_MUL: &str = "c2v_f32_mul";
pub const F32_NEG: &str = "c2v_f32_neg";
pub const F32_EQ: &str = "c2v_f32_eq";
pub const F32_LT: &str = "c2v_f32_lt";
pub const F32_LE: &str = "c2v_f32_le";
pub const I32_TO_F32: &str = "c2v_i32_to_f32";
pub const U32_TO_F32: &str = "c2v_u32_to_f32";
pub const F32_TO_I32: &str = "c2v_f32_to_i32";
pub const F32_TO_U32: &str = "c2v_f32_to_u32";

/// Headers resolved without touching the file system. Their declarations
/// live in the prelude, so most are empty.
pub fn virtual_header(name: &str) -> Option<&'static str> {
    Some(match name {
        "SoftFloat.h" | "softfloat.h" | "stdint.h" | "stddef.h" | "assert.h" | "softfloat_types.h" => "",
        "stdbool.h" => "#define bool _Bool\n#define true 1\n#define false 0\n",
        _ => return None,
    })
}
