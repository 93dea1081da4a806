//! Pencils of conics and the rational classes we census.
//!
//! A pencil is the projective line of conics spanned by two quadratic forms
//! `F`, `G`; we parametrize its members as `ηF + G` for `η ∈ F_q` together
//! with `F` itself at `η = ∞`.  Generators are kept as *raw* polarized
//! matrices (no normalization), so the member matrix depends polynomially on
//! the parameter and determinant identities hold with one fixed scalar across
//! the whole pencil.
//!
//! A pencil whose characteristic cubic `det(tF + G)` has three distinct roots
//! over the algebraic closure contains exactly three singular members, and the
//! Galois action on those members sorts such pencils into a small number of
//! rational classes.  We implement the five classes whose generic member pair
//! is transversal, labelled by their traditional numbers 3, 14, 16, 18, 19:
//!
//! * class 3 — all three singular members rational (four rational base
//!   points); `σ = q − 2` nonsingular members,
//! * class 14 — one rational singular member, two conjugate over `F_{q²}`;
//!   `σ = q`,
//! * class 16 — three rational singular members but only two rational base
//!   points; `σ = q − 2`,
//! * class 18 — three singular members conjugate over `F_{q³}`; `σ = q + 1`,
//! * class 19 — one rational singular member of non-split type; `σ = q`.
//!
//! Transversality of a member pair (four distinct base points over the
//! closure) is decided by the discriminant of the characteristic cubic; the
//! heavier point-counting oracle in [`crate::oracle`] cross-checks this.

use crate::geom::{Conic, Mat3};
use crate::gf::{FieldCtx, Fq};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PencilError {
    #[error("pencil classes other than class 3 need characteristic at least 5, got {0}")]
    SmallCharacteristic(u32),
    #[error("invalid class parameters: {0}")]
    InvalidParams(&'static str),
}

/// Coefficients of `det(tA + B)`, stored low degree first:
/// `c[0] = det B`, `c[3] = det A`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CharCubic {
    pub c: [Fq; 4],
}

/// `tr(X·Y)`, the bilinear pairing used for the middle coefficients of the
/// characteristic cubic.
pub fn trace_prod(ctx: &FieldCtx, x: &Mat3, y: &Mat3) -> Fq {
    let mut acc = ctx.zero();
    for i in 0..3 {
        for j in 0..3 {
            acc = ctx.add(acc, ctx.mul(x.m[i][j], y.m[j][i]));
        }
    }
    acc
}

/// Expand `det(tA + B)` as a cubic in `t` without interpolating: the middle
/// coefficients are the traces `tr(adj(A)·B)` and `tr(adj(B)·A)`.
pub fn char_cubic(ctx: &FieldCtx, a: &Mat3, b: &Mat3) -> CharCubic {
    CharCubic {
        c: [
            b.det(ctx),
            trace_prod(ctx, &b.adjugate(ctx), a),
            trace_prod(ctx, &a.adjugate(ctx), b),
            a.det(ctx),
        ],
    }
}

impl CharCubic {
    pub fn eval(&self, ctx: &FieldCtx, t: Fq) -> Fq {
        let mut acc = self.c[3];
        for k in (0..3).rev() {
            acc = ctx.add(ctx.mul(acc, t), self.c[k]);
        }
        acc
    }

    /// The cubic with the roles of the two matrices swapped, i.e. the
    /// coefficient list reversed.
    pub fn reversed(&self) -> CharCubic {
        let [c0, c1, c2, c3] = self.c;
        CharCubic { c: [c3, c2, c1, c0] }
    }

    /// Discriminant of the cubic; nonzero exactly when the roots over the
    /// closure are distinct (the leading coefficient must be nonzero for the
    /// classical formula to mean that, which holds whenever both matrices are
    /// nonsingular).
    pub fn disc(&self, ctx: &FieldCtx) -> Fq {
        let [c0, c1, c2, c3] = self.c;
        let t18 = ctx.mul(
            ctx.elem(18),
            ctx.mul(ctx.mul(c3, c2), ctx.mul(c1, c0)),
        );
        let t4a = ctx.mul(ctx.elem(4), ctx.mul(ctx.mul(ctx.mul(c2, c2), c2), c0));
        let tsq = ctx.mul(ctx.mul(c2, c2), ctx.mul(c1, c1));
        let t4b = ctx.mul(ctx.elem(4), ctx.mul(c3, ctx.mul(ctx.mul(c1, c1), c1)));
        let t27 = ctx.mul(ctx.elem(27), ctx.mul(ctx.mul(c3, c3), ctx.mul(c0, c0)));
        ctx.sub(ctx.add(ctx.sub(t18, t4a), tsq), ctx.add(t4b, t27))
    }
}

/// Whether two distinct nonsingular conics meet in four distinct points over
/// the algebraic closure.  Decided by the discriminant of `det(tA + B)`;
/// passing the same conic twice yields a triple root and hence `false`.
pub fn is_transversal(ctx: &FieldCtx, a: &Conic, b: &Conic) -> bool {
    assert!(
        a.is_nonsingular() && b.is_nonsingular(),
        "transversality is only defined for nonsingular conics"
    );
    !char_cubic(ctx, a.matrix(), b.matrix()).disc(ctx).is_zero()
}

/// Parameter of a pencil member: `Finite(η)` is `ηF + G`, `Infinity` is `F`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PencilParam {
    Finite(Fq),
    Infinity,
}

impl fmt::Display for PencilParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PencilParam::Finite(t) => write!(f, "{}", t),
            PencilParam::Infinity => write!(f, "inf"),
        }
    }
}

/// A pencil of conics, stored as the raw polarized matrices of its two
/// generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pencil {
    f: Mat3,
    g: Mat3,
}

impl Pencil {
    pub fn new(f: Mat3, g: Mat3) -> Self {
        assert!(f.is_symmetric() && g.is_symmetric());
        Pencil { f, g }
    }

    /// The pencil through the four rational points `[1,0,0]`, `[0,1,0]`,
    /// `[0,0,1]`, `[1,1,1]`, generated by `xy − xz` and `xz − yz`.  Its member
    /// at parameter `α` is the conic `αxy + (1−α)xz − yz`.
    pub fn four_point(ctx: &FieldCtx) -> Self {
        let o = ctx.zero();
        let one = ctx.one();
        let neg = ctx.neg(one);
        Pencil {
            f: Mat3::from_form(ctx, o, o, o, one, neg, o),
            g: Mat3::from_form(ctx, o, o, o, o, one, neg),
        }
    }

    pub fn f(&self) -> &Mat3 {
        &self.f
    }

    pub fn g(&self) -> &Mat3 {
        &self.g
    }

    pub fn member_matrix(&self, ctx: &FieldCtx, param: PencilParam) -> Mat3 {
        match param {
            PencilParam::Finite(t) => self.f.scale(ctx, t).add_mat(ctx, &self.g),
            PencilParam::Infinity => self.f,
        }
    }

    pub fn member(&self, ctx: &FieldCtx, param: PencilParam) -> Conic {
        Conic::from_matrix(ctx, self.member_matrix(ctx, param))
    }

    /// All `q + 1` parameters, finite ones first in value order.
    pub fn params(&self, ctx: &FieldCtx) -> Vec<PencilParam> {
        let mut out: Vec<PencilParam> = ctx.elements().map(PencilParam::Finite).collect();
        out.push(PencilParam::Infinity);
        out
    }

    pub fn singular_params(&self, ctx: &FieldCtx) -> Vec<PencilParam> {
        self.params(ctx)
            .into_iter()
            .filter(|&p| self.member_matrix(ctx, p).det(ctx).is_zero())
            .collect()
    }

    pub fn nonsingular_params(&self, ctx: &FieldCtx) -> Vec<PencilParam> {
        self.params(ctx)
            .into_iter()
            .filter(|&p| !self.member_matrix(ctx, p).det(ctx).is_zero())
            .collect()
    }

    /// Number of nonsingular members, written `σ` in the census reports.
    pub fn sigma(&self, ctx: &FieldCtx) -> usize {
        self.nonsingular_params(ctx).len()
    }

    pub fn nonsingular_members(&self, ctx: &FieldCtx) -> Vec<(PencilParam, Conic)> {
        self.nonsingular_params(ctx)
            .into_iter()
            .map(|p| (p, self.member(ctx, p)))
            .collect()
    }
}

/// Label of a pencil class, by its traditional number.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassTag {
    C3,
    C14,
    C16,
    C18,
    C19,
}

impl ClassTag {
    pub const ALL: [ClassTag; 5] = [
        ClassTag::C3,
        ClassTag::C14,
        ClassTag::C16,
        ClassTag::C18,
        ClassTag::C19,
    ];

    pub fn number(self) -> u32 {
        match self {
            ClassTag::C3 => 3,
            ClassTag::C14 => 14,
            ClassTag::C16 => 16,
            ClassTag::C18 => 18,
            ClassTag::C19 => 19,
        }
    }

    pub fn from_number(n: u32) -> Option<ClassTag> {
        ClassTag::ALL.into_iter().find(|t| t.number() == n)
    }

    /// Expected number of nonsingular members for a valid pencil of this
    /// class over `F_q`.
    pub fn expected_sigma(self, ctx: &FieldCtx) -> usize {
        let q = ctx.q() as usize;
        match self {
            ClassTag::C3 | ClassTag::C16 => q - 2,
            ClassTag::C14 | ClassTag::C19 => q,
            ClassTag::C18 => q + 1,
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl std::str::FromStr for ClassTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<u32>()
            .ok()
            .and_then(ClassTag::from_number)
            .ok_or_else(|| format!("unknown pencil class `{s}` (expected 3, 14, 16, 18 or 19)"))
    }
}

/// A parametrized pencil of one of the five supported classes.
///
/// The parameters are exactly the free constants in the normal forms of the
/// generators; [`DicksonClass::validate`] enforces the side conditions that
/// make the tuple land in the stated class.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DicksonClass {
    /// `F = xy`, `G = z² + yz + xz`.
    C3,
    /// `F = xy`, `G = y² + yz + xz + ez²` with `1 − 4e` a non-square.
    C14 { e: Fq },
    /// `F = xy`, `G = e₁x² + e₂y² + xz + yz + z²` with both `1 − 4eᵢ`
    /// non-squares.
    C16 { e1: Fq, e2: Fq },
    /// `F = y² − xz`, `G = x² + by² + cxy + yz` with `T³ + bT² + cT + 1`
    /// irreducible.
    C18 { b: Fq, c: Fq },
    /// `F = x² − νy²`, `G = z² − ρy² + 2σxy` with `ν` and `ρ² − 4νσ²`
    /// non-squares.
    C19 { nu: Fq, rho: Fq, sigma: Fq },
}

impl DicksonClass {
    pub fn tag(&self) -> ClassTag {
        match self {
            DicksonClass::C3 => ClassTag::C3,
            DicksonClass::C14 { .. } => ClassTag::C14,
            DicksonClass::C16 { .. } => ClassTag::C16,
            DicksonClass::C18 { .. } => ClassTag::C18,
            DicksonClass::C19 { .. } => ClassTag::C19,
        }
    }

    /// Builds a tuple of the given class from raw parameter values, checking
    /// only the arity; validity over a specific field is `validate`'s job.
    pub fn from_params(tag: ClassTag, params: &[Fq]) -> Result<Self, PencilError> {
        match (tag, params) {
            (ClassTag::C3, []) => Ok(DicksonClass::C3),
            (ClassTag::C14, &[e]) => Ok(DicksonClass::C14 { e }),
            (ClassTag::C16, &[e1, e2]) => Ok(DicksonClass::C16 { e1, e2 }),
            (ClassTag::C18, &[b, c]) => Ok(DicksonClass::C18 { b, c }),
            (ClassTag::C19, &[nu, rho, sigma]) => Ok(DicksonClass::C19 { nu, rho, sigma }),
            _ => Err(PencilError::InvalidParams(
                "wrong number of parameters for the class",
            )),
        }
    }

    /// The free parameters of the normal form, in declaration order.
    pub fn params(&self) -> Vec<Fq> {
        match *self {
            DicksonClass::C3 => vec![],
            DicksonClass::C14 { e } => vec![e],
            DicksonClass::C16 { e1, e2 } => vec![e1, e2],
            DicksonClass::C18 { b, c } => vec![b, c],
            DicksonClass::C19 { nu, rho, sigma } => vec![nu, rho, sigma],
        }
    }

    pub fn validate(&self, ctx: &FieldCtx) -> Result<(), PencilError> {
        if !matches!(self, DicksonClass::C3) && ctx.p() < 5 {
            return Err(PencilError::SmallCharacteristic(ctx.p()));
        }
        let four = ctx.elem(4);
        let nonsquare = |a: Fq| ctx.legendre(a) == -1;
        match *self {
            DicksonClass::C3 => Ok(()),
            DicksonClass::C14 { e } => {
                if nonsquare(ctx.sub(ctx.one(), ctx.mul(four, e))) {
                    Ok(())
                } else {
                    Err(PencilError::InvalidParams("1 - 4e must be a non-square"))
                }
            }
            DicksonClass::C16 { e1, e2 } => {
                if nonsquare(ctx.sub(ctx.one(), ctx.mul(four, e1)))
                    && nonsquare(ctx.sub(ctx.one(), ctx.mul(four, e2)))
                {
                    Ok(())
                } else {
                    Err(PencilError::InvalidParams(
                        "both 1 - 4e1 and 1 - 4e2 must be non-squares",
                    ))
                }
            }
            DicksonClass::C18 { b, c } => {
                // A cubic is irreducible over F_q iff it has no root there.
                let has_root = ctx.elements().any(|t| {
                    let t2 = ctx.mul(t, t);
                    let v = ctx.add(
                        ctx.add(ctx.mul(t2, t), ctx.mul(b, t2)),
                        ctx.add(ctx.mul(c, t), ctx.one()),
                    );
                    v.is_zero()
                });
                if has_root {
                    Err(PencilError::InvalidParams(
                        "T^3 + bT^2 + cT + 1 must have no rational root",
                    ))
                } else {
                    Ok(())
                }
            }
            DicksonClass::C19 { nu, rho, sigma } => {
                let disc = ctx.sub(
                    ctx.mul(rho, rho),
                    ctx.mul(four, ctx.mul(nu, ctx.mul(sigma, sigma))),
                );
                if nonsquare(nu) && nonsquare(disc) {
                    Ok(())
                } else {
                    Err(PencilError::InvalidParams(
                        "nu and rho^2 - 4 nu sigma^2 must both be non-squares",
                    ))
                }
            }
        }
    }

    /// Generator matrices of the normal form, without validity checks.
    fn generators(&self, ctx: &FieldCtx) -> (Mat3, Mat3) {
        let o = ctx.zero();
        let one = ctx.one();
        match *self {
            DicksonClass::C3 => (
                Mat3::from_form(ctx, o, o, o, one, o, o),
                Mat3::from_form(ctx, o, o, one, o, one, one),
            ),
            DicksonClass::C14 { e } => (
                Mat3::from_form(ctx, o, o, o, one, o, o),
                Mat3::from_form(ctx, o, one, e, o, one, one),
            ),
            DicksonClass::C16 { e1, e2 } => (
                Mat3::from_form(ctx, o, o, o, one, o, o),
                Mat3::from_form(ctx, e1, e2, one, o, one, one),
            ),
            DicksonClass::C18 { b, c } => (
                Mat3::from_form(ctx, o, one, o, o, ctx.neg(one), o),
                Mat3::from_form(ctx, one, b, o, c, o, one),
            ),
            DicksonClass::C19 { nu, rho, sigma } => (
                Mat3::from_form(ctx, one, ctx.neg(nu), o, o, o, o),
                Mat3::from_form(
                    ctx,
                    o,
                    ctx.neg(rho),
                    one,
                    ctx.mul(ctx.elem(2), sigma),
                    o,
                    o,
                ),
            ),
        }
    }

    pub fn pencil(&self, ctx: &FieldCtx) -> Result<Pencil, PencilError> {
        self.validate(ctx)?;
        let (f, g) = self.generators(ctx);
        Ok(Pencil::new(f, g))
    }
}

/// All valid parameter tuples of a class over `F_q`, in deterministic order.
pub fn enumerate_valid(ctx: &FieldCtx, tag: ClassTag) -> Vec<DicksonClass> {
    let elems: Vec<Fq> = ctx.elements().collect();
    let mut out = Vec::new();
    match tag {
        ClassTag::C3 => out.push(DicksonClass::C3),
        ClassTag::C14 => {
            for &e in &elems {
                out.push(DicksonClass::C14 { e });
            }
        }
        ClassTag::C16 => {
            for &e1 in &elems {
                for &e2 in &elems {
                    out.push(DicksonClass::C16 { e1, e2 });
                }
            }
        }
        ClassTag::C18 => {
            for &b in &elems {
                for &c in &elems {
                    out.push(DicksonClass::C18 { b, c });
                }
            }
        }
        ClassTag::C19 => {
            for &nu in &elems {
                if ctx.legendre(nu) != -1 {
                    continue;
                }
                for &rho in &elems {
                    for &sigma in &elems {
                        out.push(DicksonClass::C19 { nu, rho, sigma });
                    }
                }
            }
        }
    }
    out.retain(|cls| cls.validate(ctx).is_ok());
    out
}

/// Valid class-18 tuples on the locus `b² = 3c`, where the quadratic factor
/// of the reference discriminant degenerates to a linear polynomial and the
/// closure count obeys a tighter bound.
pub fn enumerate_c18_linear_subcase(ctx: &FieldCtx) -> Vec<DicksonClass> {
    if ctx.p() < 5 {
        return Vec::new();
    }
    let third = ctx.inv(ctx.elem(3));
    ctx.elements()
        .map(|b| DicksonClass::C18 {
            b,
            c: ctx.mul(ctx.mul(b, b), third),
        })
        .filter(|cls| cls.validate(ctx).is_ok())
        .collect()
}

/// A deterministic sample of at most `cap` valid tuples of a class.  Returns
/// the full enumeration when it is small enough.
pub fn sample_valid(ctx: &FieldCtx, tag: ClassTag, cap: usize, seed: u64) -> Vec<DicksonClass> {
    let all = enumerate_valid(ctx, tag);
    if all.len() <= cap {
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, all.len(), cap).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| all[i]).collect()
}
