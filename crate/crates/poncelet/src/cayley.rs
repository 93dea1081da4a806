//! Algebraic closure conditions for inscribed-circumscribed polygons.
//!
//! For a transversal pair of nonsingular conics `A`, `B`, the existence of an
//! `n`-gon inscribed in `A` and circumscribed about `B` is governed by the
//! Taylor coefficients of `√(det(tA + B))` at `t = 0`.  We normalize by the
//! constant term: with `e_k = c_k / c_0` the series
//!
//! ```text
//! √(Δ(t)/c_0) = 1 + h_1 t + h_2 t² + …
//! ```
//!
//! has coefficients in `F_q` (no square roots are ever taken), and the `n`-gon
//! condition is the vanishing of a small Hankel determinant in the `h_k`:
//! `h_2` for triangles, `h_3` for quadrilaterals, and growing determinants up
//! to the 4×4 one for `n = 9`.  The vanishing is invariant under rescaling
//! either matrix and under simultaneous congruence, so the predicate is
//! well-defined on conics.
//!
//! For triangles there is a shortcut: `h_2 ∝ 4c_0c_2 − c_1²`, so the census
//! loops can decide the triangle condition without computing the series.
//!
//! The module also carries the reference polynomials of the standard
//! four-point pencil (class 3), against which the general machinery is
//! cross-checked: the triangle locus `r² + (6s²−4s³−4s)r + s⁴`, its
//! discriminant factorization `16s²(s−1)² · (s²−s+1)`, and the sextic cutting
//! out the quadrilateral locus.

use crate::geom::Conic;
use crate::gf::{FieldCtx, Fq};
use crate::pencil::{char_cubic, is_transversal, CharCubic, Pencil, PencilParam};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CayleyError {
    #[error("the square-root series needs a nonzero constant term (det B ≠ 0)")]
    SingularBase,
}

/// Coefficients `h_0 = 1, h_1, …, h_8` of the normalized square-root series.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SqrtSeries {
    pub h: [Fq; 9],
}

/// Expand `√(Δ(t)/c_0)` to order `t^8` by the recursion
/// `h_k = (e_k − Σ_{i=1}^{k−1} h_i h_{k−i}) / 2`.
pub fn sqrt_series(ctx: &FieldCtx, cubic: &CharCubic) -> Result<SqrtSeries, CayleyError> {
    let c0 = cubic.c[0];
    if c0.is_zero() {
        return Err(CayleyError::SingularBase);
    }
    let inv0 = ctx.inv(c0);
    let mut e = [ctx.zero(); 9];
    e[0] = ctx.one();
    for k in 1..4 {
        e[k] = ctx.mul(cubic.c[k], inv0);
    }
    let half = ctx.half();
    let mut h = [ctx.zero(); 9];
    h[0] = ctx.one();
    for k in 1..9 {
        let mut acc = e[k];
        for i in 1..k {
            acc = ctx.sub(acc, ctx.mul(h[i], h[k - i]));
        }
        h[k] = ctx.mul(acc, half);
    }
    Ok(SqrtSeries { h })
}

fn small_det(ctx: &FieldCtx, m: &[Vec<Fq>]) -> Fq {
    match m.len() {
        1 => m[0][0],
        2 => ctx.sub(ctx.mul(m[0][0], m[1][1]), ctx.mul(m[0][1], m[1][0])),
        n => {
            // Laplace expansion along the first row; n is at most 4 here.
            let mut acc = ctx.zero();
            for j in 0..n {
                let minor: Vec<Vec<Fq>> = (1..n)
                    .map(|i| (0..n).filter(|&k| k != j).map(|k| m[i][k]).collect())
                    .collect();
                let term = ctx.mul(m[0][j], small_det(ctx, &minor));
                acc = if j % 2 == 0 {
                    ctx.add(acc, term)
                } else {
                    ctx.sub(acc, term)
                };
            }
            acc
        }
    }
}

impl SqrtSeries {
    /// The Hankel determinant whose vanishing is the `n`-gon condition:
    /// entries start at `h_2` for odd `n` and `h_3` for even `n`, with size
    /// `(n−1)/2` resp. `n/2 − 1`.
    pub fn hankel_value(&self, ctx: &FieldCtx, n: u32) -> Fq {
        let (start, size) = match n {
            3 => (2usize, 1usize),
            4 => (3, 1),
            5 => (2, 2),
            6 => (3, 2),
            7 => (2, 3),
            8 => (3, 3),
            9 => (2, 4),
            _ => panic!("polygon side count must be between 3 and 9, got {n}"),
        };
        let m: Vec<Vec<Fq>> = (0..size)
            .map(|i| (0..size).map(|j| self.h[start + i + j]).collect())
            .collect();
        small_det(ctx, &m)
    }
}

/// The `n`-gon condition evaluated from a characteristic cubic.
pub fn ngon_condition_cubic(
    ctx: &FieldCtx,
    cubic: &CharCubic,
    n: u32,
) -> Result<bool, CayleyError> {
    let series = sqrt_series(ctx, cubic)?;
    Ok(series.hankel_value(ctx, n).is_zero())
}

/// Whether some `n`-gon is inscribed in `A` and circumscribed about `B`.
///
/// Requires a transversal pair of nonsingular conics; the answer is then a
/// statement about every point of `A`, not about a particular starting point
/// (the porism).
pub fn ngon_condition(ctx: &FieldCtx, a: &Conic, b: &Conic, n: u32) -> bool {
    assert!(
        a.is_nonsingular() && b.is_nonsingular(),
        "the closure condition needs nonsingular conics"
    );
    debug_assert!(
        is_transversal(ctx, a, b),
        "the closure condition needs a transversal pair"
    );
    let cubic = char_cubic(ctx, a.matrix(), b.matrix());
    ngon_condition_cubic(ctx, &cubic, n).expect("nonsingular B has det ≠ 0")
}

/// `4c_0c_2 − c_1²`, proportional to `h_2` by the nonzero factor `8c_0²`.
pub fn triangle_invariant(ctx: &FieldCtx, cubic: &CharCubic) -> Fq {
    let [c0, c1, c2, _] = cubic.c;
    ctx.sub(
        ctx.mul(ctx.elem(4), ctx.mul(c0, c2)),
        ctx.mul(c1, c1),
    )
}

/// Triangle condition straight from the characteristic cubic, without
/// building the series.
pub fn triangle_condition_fast(ctx: &FieldCtx, cubic: &CharCubic) -> bool {
    assert!(
        !cubic.c[0].is_zero(),
        "triangle condition needs a cubic with nonzero constant term"
    );
    triangle_invariant(ctx, cubic).is_zero()
}

/// Reference polynomials of the four-point pencil: returns
/// `(H_2(r,s), δ(s), e(s), f(s))` where `H_2 = r² + (6s²−4s³−4s)r + s⁴` cuts
/// out the triangle pairs, and its `r`-discriminant factors as
/// `δ = e·f = 16s²(s−1)² · (s²−s+1)`.
pub fn class3_reference_polys(ctx: &FieldCtx, r: Fq, s: Fq) -> (Fq, Fq, Fq, Fq) {
    let s2 = ctx.mul(s, s);
    let s3 = ctx.mul(s2, s);
    let s4 = ctx.mul(s2, s2);
    // 6s² − 4s³ − 4s
    let mid = ctx.sub(
        ctx.mul(ctx.elem(6), s2),
        ctx.add(ctx.mul(ctx.elem(4), s3), ctx.mul(ctx.elem(4), s)),
    );
    let h2 = ctx.add(ctx.add(ctx.mul(r, r), ctx.mul(mid, r)), s4);
    let sm1 = ctx.sub(s, ctx.one());
    let e = ctx.mul(
        ctx.elem(16),
        ctx.mul(s2, ctx.mul(sm1, sm1)),
    );
    let f = ctx.add(ctx.sub(s2, s), ctx.one());
    let delta = ctx.mul(e, f);
    (h2, delta, e, f)
}

/// The sextic cutting out the quadrilateral pairs of the four-point pencil:
/// `s⁶ − (2r+2)s⁵ + 5rs⁴ − 5r²s² + (2r³+2r²)s − r³`.
pub fn class3_quadrangle_poly(ctx: &FieldCtx, r: Fq, s: Fq) -> Fq {
    let r2 = ctx.mul(r, r);
    let r3 = ctx.mul(r2, r);
    let s2 = ctx.mul(s, s);
    let s4 = ctx.mul(s2, s2);
    let s5 = ctx.mul(s4, s);
    let s6 = ctx.mul(s4, s2);
    let two = ctx.elem(2);
    let five = ctx.elem(5);
    let mut acc = s6;
    acc = ctx.sub(
        acc,
        ctx.mul(ctx.add(ctx.mul(two, r), two), s5),
    );
    acc = ctx.add(acc, ctx.mul(ctx.mul(five, r), s4));
    acc = ctx.sub(acc, ctx.mul(ctx.mul(five, r2), s2));
    acc = ctx.add(
        acc,
        ctx.mul(ctx.add(ctx.mul(two, r3), ctx.mul(two, r2)), s),
    );
    ctx.sub(acc, r3)
}

/// Published class-14 discriminant `16(es²−s+1)² · (e²s²−es−3e+1)` at `s`.
pub fn class14_reference_delta(ctx: &FieldCtx, e: Fq, s: Fq) -> Fq {
    let s2 = ctx.mul(s, s);
    let sq_part = ctx.add(ctx.sub(ctx.mul(e, s2), s), ctx.one());
    let e2 = ctx.mul(e, e);
    let cofactor = ctx.add(
        ctx.sub(ctx.sub(ctx.mul(e2, s2), ctx.mul(e, s)), ctx.mul(ctx.elem(3), e)),
        ctx.one(),
    );
    ctx.mul(ctx.mul(ctx.elem(16), ctx.mul(sq_part, sq_part)), cofactor)
}

/// Published class-18 data at `s`: the leading coefficient
/// `h₀ = 3s⁴ + 4bs³ + 6cs² + 12s + 4b − c²` of the triangle polynomial as a
/// quadratic in `r`, and the discriminant
/// `δ_π = 16(s³+bs²+cs+1)² · ((b²−3c)s² + (bc−9)s + (c²−3b))`.
pub fn class18_reference(ctx: &FieldCtx, b: Fq, c: Fq, s: Fq) -> (Fq, Fq) {
    let s2 = ctx.mul(s, s);
    let s3 = ctx.mul(s2, s);
    let s4 = ctx.mul(s2, s2);
    let mut h0 = ctx.mul(ctx.elem(3), s4);
    h0 = ctx.add(h0, ctx.mul(ctx.mul(ctx.elem(4), b), s3));
    h0 = ctx.add(h0, ctx.mul(ctx.mul(ctx.elem(6), c), s2));
    h0 = ctx.add(h0, ctx.mul(ctx.elem(12), s));
    h0 = ctx.add(h0, ctx.sub(ctx.mul(ctx.elem(4), b), ctx.mul(c, c)));

    let cubic = ctx.add(
        ctx.add(s3, ctx.mul(b, s2)),
        ctx.add(ctx.mul(c, s), ctx.one()),
    );
    let e_pi = ctx.mul(ctx.elem(16), ctx.mul(cubic, cubic));
    let f_pi = ctx.add(
        ctx.add(
            ctx.mul(ctx.sub(ctx.mul(b, b), ctx.mul(ctx.elem(3), c)), s2),
            ctx.mul(ctx.sub(ctx.mul(b, c), ctx.elem(9)), s),
        ),
        ctx.sub(ctx.mul(c, c), ctx.mul(ctx.elem(3), b)),
    );
    (h0, ctx.mul(e_pi, f_pi))
}

/// Coefficients `[t₀, t₁, t₂]` of the engine triangle invariant for the pair
/// `(member r, member s)` of a pencil, viewed as a quadratic in `r` at fixed
/// `s` and recovered by interpolation at `r = 0, 1, 2`.
pub fn triangle_r_quadratic(ctx: &FieldCtx, pencil: &Pencil, s: Fq) -> [Fq; 3] {
    let b = pencil.member_matrix(ctx, PencilParam::Finite(s));
    let t_at = |rv: i64| {
        let a = pencil.member_matrix(ctx, PencilParam::Finite(ctx.elem(rv)));
        triangle_invariant(ctx, &char_cubic(ctx, &a, &b))
    };
    let t0 = t_at(0);
    let t1v = t_at(1);
    let t2v = t_at(2);
    // Finite differences: T = t0 + t1 r + t2 r².
    let half = ctx.half();
    let t2 = ctx.mul(
        half,
        ctx.add(ctx.sub(t2v, ctx.mul(ctx.elem(2), t1v)), t0),
    );
    let t1 = ctx.sub(ctx.sub(t1v, t0), t2);
    [t0, t1, t2]
}
