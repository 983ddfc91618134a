//! Hand-written symbolic specs used throughout the tests and the CLI.

use crate::address::Address;
use crate::spec::{GlueRule, NecklaceSpec};

fn rule(k: u8, u: &str, v: &str) -> GlueRule {
    GlueRule {
        k,
        u: u.parse::<Address>().expect("builtin address parses"),
        v: v.parse::<Address>().expect("builtin address parses"),
    }
}

/// The Sierpinski-gasket necklace (`n = 3`): three half-scale copies of a
/// triangle joined at edge midpoints. `z_k = f_k(p_{k+1}) = f_{k+1}(p_k)`
/// where `p_j` is the `j`-th corner, so `u_k = (k+1)^ω`, `v_k = k^ω`.
pub fn gasket() -> NecklaceSpec {
    NecklaceSpec::new(
        3,
        "gasket",
        vec![
            rule(1, "(2)", "(1)"),
            rule(2, "(3)", "(2)"),
            rule(3, "(1)", "(3)"),
        ],
    )
    .expect("gasket builtin is well-formed")
}

/// A good four-bead necklace with the same corner-gluing pattern as the
/// gasket: `u_k = (k+1)^ω`, `v_k = k^ω`, indices mod 4.
pub fn good4() -> NecklaceSpec {
    NecklaceSpec::new(
        4,
        "good4",
        vec![
            rule(1, "(2)", "(1)"),
            rule(2, "(3)", "(2)"),
            rule(3, "(4)", "(3)"),
            rule(4, "(1)", "(4)"),
        ],
    )
    .expect("good4 builtin is well-formed")
}

/// The non-good four-bead necklace of the worked example: four maps on a
/// triangle with main nodes at `0`, `a`, `a+(1-a)v`, `v`. The third map is
/// `x ↦ a+(1-a)x`, which drags the whole triangle — boundary nodes
/// included — into `F_3`'s sub-copies, so `F_31` contains both boundary
/// nodes of `F_3` and goodness fails at `(k, j) = (3, 1)`.
///
/// Glue data: the triangle corner `1` is the fixed point of map 3 (address
/// `(3)`), the corner `0` is `z_1` (addresses `1(3)`, `2(3)`), and the
/// corner `v` is `z_4` (least address `11(3)`), giving
/// `u_1 = v_1 = (3)`, `u_2 = v_2 = 1(3)`, `u_3 = 11(3)`, `v_3 = (3)`,
/// `u_4 = v_4 = 1(3)`.
pub fn crowded4() -> NecklaceSpec {
    NecklaceSpec::new(
        4,
        "crowded4",
        vec![
            rule(1, "(3)", "(3)"),
            rule(2, "1(3)", "1(3)"),
            rule(3, "11(3)", "(3)"),
            rule(4, "1(3)", "1(3)"),
        ],
    )
    .expect("crowded4 builtin is well-formed")
}

/// Looks up a builtin symbolic spec by name (`gasket`, `good4`, `crowded4`).
pub fn builtin_spec(name: &str) -> Option<NecklaceSpec> {
    match name {
        "gasket" => Some(gasket()),
        "good4" => Some(good4()),
        "crowded4" => Some(crowded4()),
        _ => None,
    }
}
