//! Checks for the four valuation-algebra axioms, usable against any
//! [`Valuation`] implementation on concrete instances.
//!
//! Each check computes both sides of an identity and compares them with
//! [`Valuation::approx_eq`]. When both sides are undefined combinations the
//! identity is considered to hold; when only one side is, it fails.

use std::fmt;

use crate::error::Result;
use crate::hypergraph::{fmt_vars, VarSet};
use crate::valuation::Valuation;

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomViolation {
    pub axiom: &'static str,
    pub detail: String,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated: {}", self.axiom, self.detail)
    }
}

impl std::error::Error for AxiomViolation {}

fn compare<V: Valuation>(
    axiom: &'static str,
    what: &str,
    lhs: Result<V>,
    rhs: Result<V>,
    tol: f64,
) -> Result<(), AxiomViolation> {
    let fail = |detail: String| Err(AxiomViolation { axiom, detail });
    match (lhs, rhs) {
        (Ok(a), Ok(b)) if a.approx_eq(&b, tol) => Ok(()),
        (Ok(a), Ok(b)) => fail(format!("{what}: {a:?} != {b:?}")),
        (Err(a), Err(b)) if a.is_undefined_combination() && b.is_undefined_combination() => Ok(()),
        (Err(e), _) | (_, Err(e)) => fail(format!("{what}: {e}")),
    }
}

/// Marginalizing to the whole domain returns the valuation unchanged.
pub fn identity<V: Valuation>(g: &V, tol: f64) -> Result<(), AxiomViolation> {
    compare(
        "identity",
        "G to its own domain",
        g.marginalize(&g.domain()),
        Ok(g.clone()),
        tol,
    )
}

/// Marginalizing to `small` directly or via `large` agrees, for
/// `small ⊆ large ⊆ domain(g)`.
pub fn consonance<V: Valuation>(
    g: &V,
    small: &VarSet,
    large: &VarSet,
    tol: f64,
) -> Result<(), AxiomViolation> {
    let what = format!("via {} to {}", fmt_vars(large), fmt_vars(small));
    let two_step = g.marginalize(large).and_then(|m| m.marginalize(small));
    compare("consonance", &what, g.marginalize(small), two_step, tol)
}

pub fn commutativity<V: Valuation>(g: &V, h: &V, tol: f64) -> Result<(), AxiomViolation> {
    compare(
        "commutativity",
        "G*H vs H*G",
        g.combine(h),
        h.combine(g),
        tol,
    )
}

/// Every bracketing of every ordering of the three operands agrees with
/// `(g * h) * k`.
pub fn associativity<V: Valuation>(g: &V, h: &V, k: &V, tol: f64) -> Result<(), AxiomViolation> {
    let ops = [g, h, k];
    let reference = || g.combine(h).and_then(|gh| gh.combine(k));
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    for p in PERMS {
        let (a, b, c) = (ops[p[0]], ops[p[1]], ops[p[2]]);
        let left = a.combine(b).and_then(|ab| ab.combine(c));
        let right = b.combine(c).and_then(|bc| a.combine(&bc));
        compare(
            "associativity",
            &format!("({p:?}) left-nested"),
            left,
            reference(),
            tol,
        )?;
        compare(
            "associativity",
            &format!("({p:?}) right-nested"),
            right,
            reference(),
            tol,
        )?;
    }
    Ok(())
}

/// `(g * h)` marginalized to `domain(g)` equals `g * (h to domain(g) ∩ domain(h))`.
pub fn distributivity<V: Valuation>(g: &V, h: &V, tol: f64) -> Result<(), AxiomViolation> {
    let gd = g.domain();
    let shared: VarSet = gd.intersection(&h.domain()).cloned().collect();
    let lhs = g.combine(h).and_then(|gh| gh.marginalize(&gd));
    let rhs = if shared.is_empty() {
        // Marginals on the empty set are undefined; route through one
        // variable of h and sum it out again.
        let any: VarSet = h.domain().into_iter().take(1).collect();
        h.marginalize(&any)
            .and_then(|hm| g.combine(&hm))
            .and_then(|r| r.marginalize(&gd))
    } else {
        h.marginalize(&shared).and_then(|hm| g.combine(&hm))
    };
    compare("distributivity", "(G*H) to dom(G)", lhs, rhs, tol)
}
