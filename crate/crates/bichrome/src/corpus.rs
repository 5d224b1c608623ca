//! The shipped backend manifests and `.bg` fixtures, embedded so that the
//! self test does not depend on the working directory.

use crate::error::Result;
use crate::hopf::{HopfPresentation, Manifest};

pub const ABELIAN_MODULAR: &str = include_str!("../data/abelian_modular.json");
pub const UQSL2: &str = include_str!("../data/uqsl2.json");

/// (file name, contents) for every shipped fixture.
pub const FIXTURES: &[(&str, &str)] = &[
    ("L_2_1.bg", include_str!("../data/fixtures/L_2_1.bg")),
    ("L_3_1.bg", include_str!("../data/fixtures/L_3_1.bg")),
    ("L_4_1.bg", include_str!("../data/fixtures/L_4_1.bg")),
    ("L_5_1.bg", include_str!("../data/fixtures/L_5_1.bg")),
    ("O_minus.bg", include_str!("../data/fixtures/O_minus.bg")),
    ("O_plus.bg", include_str!("../data/fixtures/O_plus.bg")),
    ("blue_P1_and_O_plus.bg", include_str!("../data/fixtures/blue_P1_and_O_plus.bg")),
    ("blue_P1_unknot.bg", include_str!("../data/fixtures/blue_P1_unknot.bg")),
    ("blue_P2_twisted.bg", include_str!("../data/fixtures/blue_P2_twisted.bg")),
    ("blue_chain_P1_P2_P3.bg", include_str!("../data/fixtures/blue_chain_P1_P2_P3.bg")),
    ("blue_hopf_P1_P2.bg", include_str!("../data/fixtures/blue_hopf_P1_P2.bg")),
    ("blue_trefoil_P2.bg", include_str!("../data/fixtures/blue_trefoil_P2.bg")),
    ("coupon_loop_G.bg", include_str!("../data/fixtures/coupon_loop_G.bg")),
    ("cut_coupon.bg", include_str!("../data/fixtures/cut_coupon.bg")),
    ("hopf_P1_meridian_P2.bg", include_str!("../data/fixtures/hopf_P1_meridian_P2.bg")),
    ("meridian_P1.bg", include_str!("../data/fixtures/meridian_P1.bg")),
    ("meridian_minus_G.bg", include_str!("../data/fixtures/meridian_minus_G.bg")),
    ("meridian_plus_P2.bg", include_str!("../data/fixtures/meridian_plus_P2.bg")),
    ("red_hopf_blue_P1.bg", include_str!("../data/fixtures/red_hopf_blue_P1.bg")),
    ("unknot0_red.bg", include_str!("../data/fixtures/unknot0_red.bg")),
    ("unknot0_red_plus_blueP1.bg", include_str!("../data/fixtures/unknot0_red_plus_blueP1.bg")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Load one of the shipped manifests by backend name.
pub fn shipped(name: &str) -> Option<Result<HopfPresentation>> {
    let text = match name {
        "abelian_modular" => ABELIAN_MODULAR,
        "uqsl2" => UQSL2,
        _ => return None,
    };
    Some(Manifest::from_json(text).and_then(|m| m.to_presentation()))
}
