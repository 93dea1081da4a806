//! Projective plane over `F_q`: points, lines, conics, polarity.
//!
//! Points and lines are stored in a canonical normalization — the first
//! nonzero coordinate is scaled to 1 — so representational equality is
//! projective equality and sorting is deterministic.  Conics are symmetric
//! 3x3 matrices under the same normalization (first nonzero entry in
//! row-major upper-triangle order is 1).
//!
//! Matrix convention: a conic built from the quadratic form
//! `a x^2 + b y^2 + c z^2 + d xy + e xz + f yz` gets the polarized matrix
//! `[[2a, d, e], [d, 2b, f], [e, f, 2c]]` — off-diagonal entries carry the
//! full cross-term coefficient, diagonals are doubled.  Over odd
//! characteristic this is twice the classical half-coefficient matrix, so it
//! represents the same conic and the same polarity while keeping all entries
//! integral in the form's coefficients.  Scalars this convention introduces
//! cancel in every predicate downstream.

use crate::gf::{FieldCtx, Fq};

/// A point of `P^2(F_q)`, normalized so the first nonzero coordinate is 1.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PPoint {
    pub x: Fq,
    pub y: Fq,
    pub z: Fq,
}

/// A line of `P^2(F_q)` with coefficient triple `(u, v, w)` — the locus
/// `ux + vy + wz = 0` — under the same normalization as points.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PLine {
    pub u: Fq,
    pub v: Fq,
    pub w: Fq,
}

fn normalize3(ctx: &FieldCtx, t: [Fq; 3]) -> [Fq; 3] {
    let lead = t.iter().find(|c| !c.is_zero()).copied();
    let lead = lead.expect("zero triple has no projective normalization");
    if lead == ctx.one() {
        return t;
    }
    let s = ctx.inv(lead);
    [ctx.mul(t[0], s), ctx.mul(t[1], s), ctx.mul(t[2], s)]
}

impl PPoint {
    /// Normalizing constructor.  Panics on the zero triple.
    pub fn new(ctx: &FieldCtx, x: Fq, y: Fq, z: Fq) -> Self {
        let [x, y, z] = normalize3(ctx, [x, y, z]);
        PPoint { x, y, z }
    }

    pub fn from_ints(ctx: &FieldCtx, x: i64, y: i64, z: i64) -> Self {
        Self::new(ctx, ctx.elem(x), ctx.elem(y), ctx.elem(z))
    }

    pub fn coords(&self) -> [Fq; 3] {
        [self.x, self.y, self.z]
    }

    /// Incidence with a line.
    pub fn on_line(&self, ctx: &FieldCtx, l: &PLine) -> bool {
        let s = ctx.add(
            ctx.add(ctx.mul(l.u, self.x), ctx.mul(l.v, self.y)),
            ctx.mul(l.w, self.z),
        );
        s.is_zero()
    }
}

impl std::fmt::Display for PPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]", self.x, self.y, self.z)
    }
}

impl PLine {
    /// Normalizing constructor.  Panics on the zero triple.
    pub fn new(ctx: &FieldCtx, u: Fq, v: Fq, w: Fq) -> Self {
        let [u, v, w] = normalize3(ctx, [u, v, w]);
        PLine { u, v, w }
    }

    pub fn from_ints(ctx: &FieldCtx, u: i64, v: i64, w: i64) -> Self {
        Self::new(ctx, ctx.elem(u), ctx.elem(v), ctx.elem(w))
    }

    /// Two distinct points spanning this line, chosen deterministically from
    /// the leading coefficient pattern.
    pub fn span(&self, ctx: &FieldCtx) -> (PPoint, PPoint) {
        let one = ctx.one();
        let zero = ctx.zero();
        if !self.u.is_zero() {
            // u = 1 after normalization.
            let p1 = PPoint::new(ctx, ctx.neg(self.v), one, zero);
            let p2 = PPoint::new(ctx, ctx.neg(self.w), zero, one);
            (p1, p2)
        } else if !self.v.is_zero() {
            let p1 = PPoint::new(ctx, one, zero, zero);
            let p2 = PPoint::new(ctx, zero, ctx.neg(self.w), one);
            (p1, p2)
        } else {
            let p1 = PPoint::new(ctx, one, zero, zero);
            let p2 = PPoint::new(ctx, zero, one, zero);
            (p1, p2)
        }
    }

    /// All `F_q`-points of `L` intersected with the conic: zero, one (a
    /// tangency or repeated root), or two points, in canonical order.
    ///
    /// Panics if the line lies entirely inside the (necessarily singular)
    /// conic, which cannot arise from the nonsingular conics used here.
    pub fn intersect_conic(&self, ctx: &FieldCtx, c: &Conic) -> Vec<PPoint> {
        let (p1, p2) = self.span(ctx);
        let a = c.eval(ctx, &p1);
        let b = c.bilinear(ctx, &p1, &p2);
        let cc = c.eval(ctx, &p2);
        // Roots of a s^2 + b s t + cc t^2 over P^1, mapped to s*p1 + t*p2.
        let mut out = Vec::with_capacity(2);
        if a.is_zero() {
            assert!(
                !(b.is_zero() && cc.is_zero()),
                "line contained in a degenerate conic"
            );
            out.push(p1); // root (1 : 0)
            if !b.is_zero() {
                let pt = combine(ctx, ctx.neg(cc), &p1, b, &p2);
                if pt != p1 {
                    out.push(pt);
                }
            }
        } else {
            let disc = ctx.sub(ctx.mul(b, b), ctx.mul(ctx.elem(4), ctx.mul(a, cc)));
            if let Some(root) = ctx.sqrt(disc) {
                let inv2a = ctx.inv(ctx.mul(ctx.elem(2), a));
                let s1 = ctx.mul(ctx.sub(root, b), inv2a);
                out.push(combine(ctx, s1, &p1, ctx.one(), &p2));
                if !root.is_zero() {
                    let s2 = ctx.mul(ctx.sub(ctx.neg(root), b), inv2a);
                    out.push(combine(ctx, s2, &p1, ctx.one(), &p2));
                }
            }
        }
        out.sort();
        out
    }
}

impl std::fmt::Display for PLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{},{}]", self.u, self.v, self.w)
    }
}

/// The line through two distinct points (coefficient triple = cross product).
pub fn line_through(ctx: &FieldCtx, a: &PPoint, b: &PPoint) -> PLine {
    assert!(a != b, "line_through needs distinct points");
    let u = ctx.sub(ctx.mul(a.y, b.z), ctx.mul(a.z, b.y));
    let v = ctx.sub(ctx.mul(a.z, b.x), ctx.mul(a.x, b.z));
    let w = ctx.sub(ctx.mul(a.x, b.y), ctx.mul(a.y, b.x));
    PLine::new(ctx, u, v, w)
}

fn combine(ctx: &FieldCtx, s: Fq, p1: &PPoint, t: Fq, p2: &PPoint) -> PPoint {
    PPoint::new(
        ctx,
        ctx.add(ctx.mul(s, p1.x), ctx.mul(t, p2.x)),
        ctx.add(ctx.mul(s, p1.y), ctx.mul(t, p2.y)),
        ctx.add(ctx.mul(s, p1.z), ctx.mul(t, p2.z)),
    )
}

/// The second intersection of line `l` with conic `c`, given a point `p`
/// already on both.  Returns `p` itself exactly when `l` is tangent to `c`
/// at `p`.
pub fn second_intersection(ctx: &FieldCtx, p: &PPoint, l: &PLine, c: &Conic) -> PPoint {
    debug_assert!(p.on_line(ctx, l), "p must lie on l");
    debug_assert!(c.contains(ctx, p), "p must lie on c");
    let (s1, s2) = l.span(ctx);
    let quad = if &s1 != p { s1 } else { s2 };
    let b = c.bilinear(ctx, p, &quad);
    let cc = c.eval(ctx, &quad);
    if b.is_zero() {
        assert!(!cc.is_zero(), "line contained in a degenerate conic");
        return *p; // tangent at p
    }
    combine(ctx, ctx.neg(cc), p, b, &quad)
}

/// Plain 3x3 matrix over `F_q`.  Used both for conics (symmetric case) and
/// for projective changes of coordinates.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct Mat3 {
    pub m: [[Fq; 3]; 3],
}

impl Mat3 {
    pub fn new(m: [[Fq; 3]; 3]) -> Self {
        Mat3 { m }
    }

    pub fn from_ints(ctx: &FieldCtx, rows: [[i64; 3]; 3]) -> Self {
        Mat3 {
            m: rows.map(|row| row.map(|e| ctx.elem(e))),
        }
    }

    /// Symmetric matrix of a quadratic form, with the polarized (doubled)
    /// convention described in the module docs.
    #[allow(clippy::many_single_char_names)]
    pub fn from_form(ctx: &FieldCtx, a: Fq, b: Fq, c: Fq, d: Fq, e: Fq, f: Fq) -> Self {
        let two = ctx.elem(2);
        Mat3 {
            m: [
                [ctx.mul(two, a), d, e],
                [d, ctx.mul(two, b), f],
                [e, f, ctx.mul(two, c)],
            ],
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.m[0][1] == self.m[1][0] && self.m[0][2] == self.m[2][0] && self.m[1][2] == self.m[2][1]
    }

    pub fn det(&self, ctx: &FieldCtx) -> Fq {
        let m = &self.m;
        let t0 = ctx.mul(
            m[0][0],
            ctx.sub(ctx.mul(m[1][1], m[2][2]), ctx.mul(m[1][2], m[2][1])),
        );
        let t1 = ctx.mul(
            m[0][1],
            ctx.sub(ctx.mul(m[1][0], m[2][2]), ctx.mul(m[1][2], m[2][0])),
        );
        let t2 = ctx.mul(
            m[0][2],
            ctx.sub(ctx.mul(m[1][0], m[2][1]), ctx.mul(m[1][1], m[2][0])),
        );
        ctx.add(ctx.sub(t0, t1), t2)
    }

    /// Adjugate (transposed cofactor matrix): `self * adj = det * I`.
    pub fn adjugate(&self, ctx: &FieldCtx) -> Mat3 {
        let m = &self.m;
        let co = |r1: usize, c1: usize, r2: usize, c2: usize| {
            ctx.sub(ctx.mul(m[r1][c1], m[r2][c2]), ctx.mul(m[r1][c2], m[r2][c1]))
        };
        // adj[i][j] = cofactor(j, i).
        Mat3 {
            m: [
                [co(1, 1, 2, 2), ctx.neg(co(0, 1, 2, 2)), co(0, 1, 1, 2)],
                [ctx.neg(co(1, 0, 2, 2)), co(0, 0, 2, 2), ctx.neg(co(0, 0, 1, 2))],
                [co(1, 0, 2, 1), ctx.neg(co(0, 0, 2, 1)), co(0, 0, 1, 1)],
            ],
        }
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3 {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn mat_mul(&self, ctx: &FieldCtx, other: &Mat3) -> Mat3 {
        let mut out = [[ctx.zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = ctx.zero();
                for k in 0..3 {
                    acc = ctx.add(acc, ctx.mul(self.m[i][k], other.m[k][j]));
                }
                out[i][j] = acc;
            }
        }
        Mat3 { m: out }
    }

    pub fn mat_vec(&self, ctx: &FieldCtx, v: [Fq; 3]) -> [Fq; 3] {
        let mut out = [ctx.zero(); 3];
        for i in 0..3 {
            let row = &self.m[i];
            out[i] = ctx.add(
                ctx.add(ctx.mul(row[0], v[0]), ctx.mul(row[1], v[1])),
                ctx.mul(row[2], v[2]),
            );
        }
        out
    }

    pub fn scale(&self, ctx: &FieldCtx, s: Fq) -> Mat3 {
        Mat3 {
            m: self.m.map(|row| row.map(|e| ctx.mul(e, s))),
        }
    }

    pub fn add_mat(&self, ctx: &FieldCtx, other: &Mat3) -> Mat3 {
        let mut out = [[ctx.zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = ctx.add(self.m[i][j], other.m[i][j]);
            }
        }
        Mat3 { m: out }
    }
}

/// A conic of `P^2(F_q)`: a nonzero symmetric matrix up to scalars, stored
/// normalized with its determinant cached.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct Conic {
    mat: Mat3,
    det: Fq,
}

impl Conic {
    /// Build from a symmetric matrix; normalizes so the first nonzero entry
    /// in row-major upper-triangle order is 1.  Panics on asymmetric or zero
    /// input.
    pub fn from_matrix(ctx: &FieldCtx, m: Mat3) -> Self {
        assert!(m.is_symmetric(), "conic matrix must be symmetric");
        let upper = [
            m.m[0][0], m.m[0][1], m.m[0][2], m.m[1][1], m.m[1][2], m.m[2][2],
        ];
        let lead = upper
            .iter()
            .find(|e| !e.is_zero())
            .copied()
            .expect("zero matrix is not a conic");
        let mat = if lead == ctx.one() {
            m
        } else {
            m.scale(ctx, ctx.inv(lead))
        };
        let det = mat.det(ctx);
        Conic { mat, det }
    }

    /// Build from the quadratic form `ax^2 + by^2 + cz^2 + dxy + exz + fyz`.
    pub fn from_form(ctx: &FieldCtx, coeffs: [Fq; 6]) -> Self {
        let [a, b, c, d, e, f] = coeffs;
        Self::from_matrix(ctx, Mat3::from_form(ctx, a, b, c, d, e, f))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.mat
    }

    /// Determinant of the normalized matrix.
    pub fn det(&self) -> Fq {
        self.det
    }

    pub fn is_nonsingular(&self) -> bool {
        !self.det.is_zero()
    }

    /// Value of the stored quadratic form at `p` (not scalar-canonical, but
    /// its vanishing is).
    pub fn eval(&self, ctx: &FieldCtx, p: &PPoint) -> Fq {
        let mp = self.mat.mat_vec(ctx, p.coords());
        dot3(ctx, p.coords(), mp)
    }

    /// The symmetric bilinear pairing `p^T M q` doubled-polarization style;
    /// `bilinear(p, p) = 2 eval(p)` in effect, but only vanishing matters.
    pub fn bilinear(&self, ctx: &FieldCtx, p: &PPoint, q: &PPoint) -> Fq {
        let mq = self.mat.mat_vec(ctx, q.coords());
        let once = dot3(ctx, p.coords(), mq);
        ctx.mul(ctx.elem(2), once)
    }

    pub fn contains(&self, ctx: &FieldCtx, p: &PPoint) -> bool {
        self.eval(ctx, p).is_zero()
    }

    /// Polar line of `p` with respect to this conic.  For `p` on the conic
    /// this is the tangent line at `p`.  Panics on singular conics.
    pub fn polar_line(&self, ctx: &FieldCtx, p: &PPoint) -> PLine {
        assert!(self.is_nonsingular(), "polar line needs a nonsingular conic");
        let [u, v, w] = self.mat.mat_vec(ctx, p.coords());
        PLine::new(ctx, u, v, w)
    }

    /// First rational point in the canonical scan order of `P^2`.
    /// Deterministic; panics only if the conic has no rational points, which
    /// cannot happen for a nonsingular conic over a finite field.
    pub fn find_point(&self, ctx: &FieldCtx) -> PPoint {
        // Affine chart x = 1 first: for each y solve the quadratic in z.
        // A nonsingular conic has at most 2 points on the line x = 0, so
        // (q+1) - 2 > 0 points land in this chart for q >= 3.
        for yv in 0..ctx.q() {
            let y = ctx.from_val(yv);
            for zv in 0..ctx.q() {
                let p = PPoint {
                    x: ctx.one(),
                    y,
                    z: ctx.from_val(zv),
                };
                if self.contains(ctx, &p) {
                    return p;
                }
            }
        }
        for zv in 0..ctx.q() {
            let p = PPoint {
                x: ctx.zero(),
                y: ctx.one(),
                z: ctx.from_val(zv),
            };
            if self.contains(ctx, &p) {
                return p;
            }
        }
        let p = PPoint {
            x: ctx.zero(),
            y: ctx.zero(),
            z: ctx.one(),
        };
        assert!(self.contains(ctx, &p), "conic has no rational points");
        p
    }

    /// All `q + 1` rational points of a nonsingular conic, in canonical
    /// order: the pencil of lines through one point sweeps out the rest.
    pub fn points(&self, ctx: &FieldCtx) -> Vec<PPoint> {
        assert!(self.is_nonsingular(), "point sweep needs a nonsingular conic");
        let p0 = self.find_point(ctx);
        self.points_through(ctx, &p0)
    }

    /// Point sweep from a known rational point `p0` of the conic.
    pub fn points_through(&self, ctx: &FieldCtx, p0: &PPoint) -> Vec<PPoint> {
        debug_assert!(self.contains(ctx, p0));
        // Two independent lines through p0, by the dual of PLine::span.
        let dual = PLine {
            u: p0.x,
            v: p0.y,
            w: p0.z,
        };
        let (l1, l2) = dual.span(ctx);
        let (l1, l2) = (
            PLine {
                u: l1.x,
                v: l1.y,
                w: l1.z,
            },
            PLine {
                u: l2.x,
                v: l2.y,
                w: l2.z,
            },
        );
        let mut out = Vec::with_capacity(ctx.q() as usize + 1);
        for tv in 0..ctx.q() {
            let t = ctx.from_val(tv);
            let line = PLine::new(
                ctx,
                ctx.add(l1.u, ctx.mul(t, l2.u)),
                ctx.add(l1.v, ctx.mul(t, l2.v)),
                ctx.add(l1.w, ctx.mul(t, l2.w)),
            );
            out.push(second_intersection(ctx, p0, &line, self));
        }
        out.push(second_intersection(ctx, p0, &l2, self));
        out.sort();
        assert_eq!(
            out.len(),
            ctx.q() as usize + 1,
            "nonsingular conic must have q + 1 points"
        );
        out
    }

    /// Image under the change of coordinates `x -> Mx`: the matrix becomes
    /// `M^T C M`.  Panics if `M` is singular.
    pub fn transform(&self, ctx: &FieldCtx, m: &Mat3) -> Conic {
        assert!(!m.det(ctx).is_zero(), "coordinate change must be invertible");
        let mt = m.transpose();
        Conic::from_matrix(ctx, mt.mat_mul(ctx, &self.mat).mat_mul(ctx, m))
    }
}

fn dot3(ctx: &FieldCtx, a: [Fq; 3], b: [Fq; 3]) -> Fq {
    ctx.add(
        ctx.add(ctx.mul(a[0], b[0]), ctx.mul(a[1], b[1])),
        ctx.mul(a[2], b[2]),
    )
}
