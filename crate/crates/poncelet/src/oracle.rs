//! Deliberately brute-force reference implementations.
//!
//! Everything here trades speed for obviousness and is used by the test
//! suites to cross-check the fast paths: full scans of `P^2`, and
//! transversality decided by literally counting distinct common points of
//! two conics over extension fields rather than through the discriminant of
//! the characteristic cubic.
//!
//! Intersection points of two conics over `F_q` have degree at most 4 over
//! `F_q`, so each lies in `F_{q^d}` for some `d` in `{1, 2, 3, 4}`.  Writing
//! `N_e` for the number of common points with coordinates in `F_{q^e}` and
//! `a_d` for the number of Galois orbits of size exactly `d`, inclusion of
//! subfields gives `N_1 = a_1`, `N_3 = a_1 + 3 a_3`, and
//! `N_4 = a_1 + 2 a_2 + 4 a_4`.  The total number of distinct geometric
//! points is therefore `N_4 + N_3 - N_1` — degree-2 and degree-4 points are
//! visible over `F_{q^4}`, degree-3 points only over `F_{q^3}`.

use crate::geom::{Conic, Mat3, PPoint};
use crate::gf::{Embedding, FieldCtx, FieldError};

/// Every point of `P^2(F_q)` in canonical normalized order.
pub fn all_points(ctx: &FieldCtx) -> Vec<PPoint> {
    let mut out = Vec::with_capacity((ctx.q() as usize) * (ctx.q() as usize) + ctx.q() as usize + 1);
    for y in 0..ctx.q() {
        for z in 0..ctx.q() {
            out.push(PPoint::new(
                ctx,
                ctx.one(),
                ctx.from_val(y),
                ctx.from_val(z),
            ));
        }
    }
    for z in 0..ctx.q() {
        out.push(PPoint::new(ctx, ctx.zero(), ctx.one(), ctx.from_val(z)));
    }
    out.push(PPoint::new(ctx, ctx.zero(), ctx.zero(), ctx.one()));
    out.sort();
    out
}

/// Rational points of a conic by full plane scan, sorted.
pub fn brute_conic_points(ctx: &FieldCtx, c: &Conic) -> Vec<PPoint> {
    all_points(ctx)
        .into_iter()
        .filter(|p| c.contains(ctx, p))
        .collect()
}

/// Transversality oracle: counts distinct geometric intersection points of
/// two conics by enumeration over `F_{q^3}` and `F_{q^4}`.
pub struct IntersectionOracle<'a> {
    base: &'a FieldCtx,
    ext3: &'a FieldCtx,
    ext4: &'a FieldCtx,
    emb3: Embedding<'a>,
    emb4: Embedding<'a>,
}

impl<'a> IntersectionOracle<'a> {
    /// `ext3` and `ext4` must be the degree-3 and degree-4 extensions of
    /// `base` (same characteristic, degrees `3r` and `4r`).
    pub fn new(
        base: &'a FieldCtx,
        ext3: &'a FieldCtx,
        ext4: &'a FieldCtx,
    ) -> Result<Self, FieldError> {
        let emb3 = Embedding::new(base, ext3)?;
        let emb4 = Embedding::new(base, ext4)?;
        Ok(IntersectionOracle {
            base,
            ext3,
            ext4,
            emb3,
            emb4,
        })
    }

    /// Number of distinct geometric points of `A` intersected with `B`.
    /// Both conics must be nonsingular over the base field.
    pub fn distinct_common_points(&self, a: &Conic, b: &Conic) -> usize {
        let n1 = a
            .points(self.base)
            .iter()
            .filter(|p| b.contains(self.base, p))
            .count();
        let n3 = self.common_points_ext(self.ext3, &self.emb3, a, b);
        let n4 = self.common_points_ext(self.ext4, &self.emb4, a, b);
        n4 + n3 - n1
    }

    /// Transversal means the intersection is four distinct points.
    pub fn is_transversal(&self, a: &Conic, b: &Conic) -> bool {
        self.distinct_common_points(a, b) == 4
    }

    fn common_points_ext(
        &self,
        ext: &FieldCtx,
        emb: &Embedding,
        a: &Conic,
        b: &Conic,
    ) -> usize {
        let lift = |c: &Conic| {
            let m = c.matrix().m.map(|row| row.map(|e| emb.apply(e)));
            Conic::from_matrix(ext, Mat3::new(m))
        };
        let la = lift(a);
        let lb = lift(b);
        // Base point found over the small field, then lifted: avoids an
        // O(q_ext^2) scan in the extension.
        let p0 = a.find_point(self.base);
        let [x, y, z] = p0.coords();
        let p0 = PPoint::new(ext, emb.apply(x), emb.apply(y), emb.apply(z));
        la.points_through(ext, &p0)
            .iter()
            .filter(|p| lb.contains(ext, p))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Conic;
    use crate::gf::field_new;

    #[test]
    fn tangent_circles_are_not_transversal() {
        // Over F_7: x^2 + y^2 - z^2 and x^2 + y^2 - 2yz + ... two conics
        // sharing a tangency at [1, 0, 1]^perp style contact.  Build a pair
        // with a forced double contact: C and its image under a shear fixing
        // a point and tangent line.
        let f = field_new(7, 1).unwrap();
        let e3 = field_new(7, 3).unwrap();
        let e4 = field_new(7, 4).unwrap();
        let oracle = IntersectionOracle::new(&f, &e3, &e4).unwrap();

        // xz - y^2 and xz - y^2 - z^2 meet only where z^2 = 0 hits, forcing
        // contact of order >= 2 at [1,0,0].
        let veronese = Conic::from_form(
            &f,
            [f.zero(), f.elem(-1), f.zero(), f.zero(), f.one(), f.zero()],
        );
        let shifted = Conic::from_form(
            &f,
            [f.zero(), f.elem(-1), f.elem(-1), f.zero(), f.one(), f.zero()],
        );
        assert!(veronese.is_nonsingular() && shifted.is_nonsingular());
        assert!(oracle.distinct_common_points(&veronese, &shifted) < 4);
        assert!(!oracle.is_transversal(&veronese, &shifted));
    }

    #[test]
    fn counts_cap_at_four_for_generic_pairs() {
        let f = field_new(5, 1).unwrap();
        let e3 = field_new(5, 3).unwrap();
        let e4 = field_new(5, 4).unwrap();
        let oracle = IntersectionOracle::new(&f, &e3, &e4).unwrap();
        let mk = |coeffs: [i64; 6]| {
            Conic::from_form(&f, coeffs.map(|c| f.elem(c)))
        };
        let pairs = [
            (mk([1, 1, -1, 0, 0, 0]), mk([1, 2, -1, 0, 0, 0])),
            (mk([1, 1, -1, 0, 0, 0]), mk([1, 1, -2, 1, 0, 0])),
            (mk([0, -1, 0, 0, 1, 0]), mk([1, -1, 1, 0, 0, 1])),
        ];
        for (a, b) in &pairs {
            if !(a.is_nonsingular() && b.is_nonsingular()) {
                continue;
            }
            let n = oracle.distinct_common_points(a, b);
            assert!(n <= 4, "Bezout bound violated: {n}");
        }
    }
}
