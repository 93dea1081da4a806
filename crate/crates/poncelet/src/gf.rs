//! Arithmetic in finite fields `F_q` of odd characteristic, `q = p^r < 2^31`.
//!
//! A [`FieldCtx`] owns everything about one field: the characteristic, the
//! degree, the reduction modulus for extension fields and (for small
//! extensions) discrete-log tables that make multiplication O(1).  Elements
//! ([`Fq`]) are plain `Copy` data: a packed representative in `[0, q)` plus
//! the order of the owning field, so that accidentally mixing elements of
//! different fields is a hard error instead of a silent coercion.
//!
//! The packed representative of an extension-field element is its coefficient
//! vector read as a base-`p` integer (low degree = least significant digit).
//! This gives every element a canonical integer name in `[0, q)`, which is
//! what all reports and traces print.
//!
//! Construction is deterministic: for fixed `(p, r)` the modulus is always
//! the lexicographically smallest monic irreducible of degree `r` over `F_p`
//! (coefficients compared low-degree-first), so two contexts for the same
//! `(p, r)` are interchangeable.

use thiserror::Error;

/// Largest `q` for which extension fields get exp/log tables.
/// Above this, multiplication falls back to schoolbook polynomial arithmetic.
const TABLE_LIMIT: u32 = 1 << 20;

/// Hard ceiling on the packed representation: `q` must fit a signed word.
const Q_LIMIT: u64 = 1 << 31;

/// Maximum extension degree.  Degree 8 covers the quartic extensions of
/// every base field used by the transversality oracle, including `F_{9^4}`.
const MAX_DEGREE: u32 = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("characteristic must be odd, got {0}")]
    EvenCharacteristic(u32),
    #[error("extension degree {0} outside supported range 1..={MAX_DEGREE}")]
    BadDegree(u32),
    #[error("field order {p}^{r} exceeds the 2^31 word budget")]
    Overflow { p: u32, r: u32 },
    #[error("no embedding of F_{src} into F_{dst}")]
    NoEmbedding { src: u32, dst: u32 },
}

/// An element of a specific `F_q`.  `val` is the canonical packed
/// representative in `[0, q)`; `q` identifies the owning field.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Fq {
    val: u32,
    q: u32,
}

impl Fq {
    /// Canonical integer representative in `[0, q)`.
    #[inline]
    pub fn val(self) -> u32 {
        self.val
    }

    /// Order of the field this element belongs to.
    #[inline]
    pub fn order(self) -> u32 {
        self.q
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.val == 0
    }
}

impl std::fmt::Display for Fq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.val)
    }
}

/// Context for one finite field `F_{p^r}`.
///
/// Immutable after construction and freely shareable across threads.  All
/// arithmetic goes through methods on this type; every method asserts that
/// its operands actually belong to this field.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    r: u32,
    q: u32,
    /// Low coefficients `c_0..c_{r-1}` of the monic modulus
    /// `x^r + c_{r-1} x^{r-1} + ... + c_0`.  For `r = 1` this is `[0]`
    /// (the trivial modulus `x`), never consulted.
    modulus: Vec<u32>,
    /// `exp[i] = g^i` for a fixed generator `g`, length `q - 1`; empty for
    /// prime fields and for extensions above `TABLE_LIMIT`.
    exp: Vec<u32>,
    /// `log[v] = i` with `exp[i] = v`; `log[0]` is unused.  Same emptiness
    /// rule as `exp`.
    log: Vec<u32>,
    /// Cached `1/2`, used constantly by the series code.
    two_inv: u32,
}

impl std::fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Build the field `F_{p^r}`.
///
/// Deterministic: the same `(p, r)` always produces the same modulus and
/// therefore the same element encoding.
pub fn field_new(p: u32, r: u32) -> Result<FieldCtx, FieldError> {
    if p < 2 || !is_prime_u32(p) {
        return Err(FieldError::NotPrime(p));
    }
    if p == 2 {
        return Err(FieldError::EvenCharacteristic(p));
    }
    if r < 1 || r > MAX_DEGREE {
        return Err(FieldError::BadDegree(r));
    }
    let mut q: u64 = 1;
    for _ in 0..r {
        q *= p as u64;
        if q >= Q_LIMIT {
            return Err(FieldError::Overflow { p, r });
        }
    }
    let q = q as u32;
    let modulus = if r == 1 {
        vec![0]
    } else {
        smallest_irreducible(p, r)
    };
    let mut ctx = FieldCtx {
        p,
        r,
        q,
        modulus,
        exp: Vec::new(),
        log: Vec::new(),
        two_inv: 0,
    };
    if r >= 2 && q <= TABLE_LIMIT {
        ctx.build_tables();
    }
    // 1/2 lies in the prime subfield: 2 * (p+1)/2 = p + 1 = 1 mod p.
    ctx.two_inv = (p + 1) / 2;
    Ok(ctx)
}

impl FieldCtx {
    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn r(&self) -> u32 {
        self.r
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    /// Low coefficients of the modulus (see field docs).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    fn check(&self, a: Fq) {
        assert!(
            a.q == self.q,
            "element of F_{} used with F_{} context",
            a.q,
            self.q
        );
    }

    // ---- Constructors for elements ----

    #[inline]
    pub fn zero(&self) -> Fq {
        Fq { val: 0, q: self.q }
    }

    #[inline]
    pub fn one(&self) -> Fq {
        Fq { val: 1, q: self.q }
    }

    /// Image of an integer under `Z -> F_p` followed by the subfield
    /// inclusion `F_p -> F_q`.
    #[inline]
    pub fn elem(&self, n: i64) -> Fq {
        let m = n.rem_euclid(self.p as i64) as u32;
        Fq { val: m, q: self.q }
    }

    /// Element with the given packed representative; `v` must be `< q`.
    #[inline]
    pub fn from_val(&self, v: u32) -> Fq {
        assert!(v < self.q, "representative {v} out of range for F_{}", self.q);
        Fq { val: v, q: self.q }
    }

    /// Element from its coefficient vector (low degree first, entries `< p`).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Fq {
        assert!(coeffs.len() <= self.r as usize, "coefficient vector too long");
        let mut val: u64 = 0;
        for &c in coeffs.iter().rev() {
            assert!(c < self.p, "coefficient {c} not reduced mod {}", self.p);
            val = val * self.p as u64 + c as u64;
        }
        Fq {
            val: val as u32,
            q: self.q,
        }
    }

    /// Coefficient vector of `a`, low degree first, length `r`.
    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        self.check(a);
        let mut v = a.val;
        let mut out = Vec::with_capacity(self.r as usize);
        for _ in 0..self.r {
            out.push(v % self.p);
            v /= self.p;
        }
        out
    }

    /// All field elements in packed-representative order.
    pub fn elements(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.q).map(move |v| Fq { val: v, q: self.q })
    }

    /// Cached `1/2`.
    #[inline]
    pub fn half(&self) -> Fq {
        Fq {
            val: self.two_inv,
            q: self.q,
        }
    }

    // ---- Ring operations ----

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        self.check(a);
        self.check(b);
        if self.r == 1 {
            let s = a.val + b.val;
            let s = if s >= self.p { s - self.p } else { s };
            return Fq { val: s, q: self.q };
        }
        let mut va = a.val;
        let mut vb = b.val;
        let mut out: u64 = 0;
        let mut scale: u64 = 1;
        for _ in 0..self.r {
            let s = va % self.p + vb % self.p;
            let s = if s >= self.p { s - self.p } else { s };
            out += s as u64 * scale;
            scale *= self.p as u64;
            va /= self.p;
            vb /= self.p;
        }
        Fq {
            val: out as u32,
            q: self.q,
        }
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        self.check(a);
        if self.r == 1 {
            let v = if a.val == 0 { 0 } else { self.p - a.val };
            return Fq { val: v, q: self.q };
        }
        let mut va = a.val;
        let mut out: u64 = 0;
        let mut scale: u64 = 1;
        for _ in 0..self.r {
            let d = va % self.p;
            let n = if d == 0 { 0 } else { self.p - d };
            out += n as u64 * scale;
            scale *= self.p as u64;
            va /= self.p;
        }
        Fq {
            val: out as u32,
            q: self.q,
        }
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        self.check(a);
        self.check(b);
        if self.r == 1 {
            let v = (a.val as u64 * b.val as u64 % self.p as u64) as u32;
            return Fq { val: v, q: self.q };
        }
        if !self.exp.is_empty() {
            if a.val == 0 || b.val == 0 {
                return self.zero();
            }
            let i = self.log[a.val as usize] as u64 + self.log[b.val as usize] as u64;
            let i = if i >= self.q as u64 - 1 {
                i - (self.q as u64 - 1)
            } else {
                i
            };
            return Fq {
                val: self.exp[i as usize],
                q: self.q,
            };
        }
        self.mul_schoolbook(a, b)
    }

    /// Polynomial-basis multiplication, bypassing the log tables.  Slow path
    /// for big extensions; also the independent cross-check the table tests
    /// compare against.
    #[doc(hidden)]
    pub fn mul_schoolbook(&self, a: Fq, b: Fq) -> Fq {
        self.check(a);
        self.check(b);
        let ca = self.coeffs(a);
        let cb = self.coeffs(b);
        let r = self.r as usize;
        let mut prod = vec![0u64; 2 * r - 1];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] += x as u64 * y as u64;
            }
        }
        let mut prod: Vec<u32> = prod.iter().map(|&v| (v % self.p as u64) as u32).collect();
        // Reduce modulo the monic modulus: x^r = -(c_{r-1} x^{r-1} + ... + c_0).
        for k in (r..prod.len()).rev() {
            let lead = prod[k];
            if lead != 0 {
                prod[k] = 0;
                for (i, &m) in self.modulus.iter().enumerate() {
                    if m != 0 {
                        let sub = lead as u64 * m as u64 % self.p as u64;
                        let cur = prod[k - r + i] as u64;
                        prod[k - r + i] =
                            ((cur + self.p as u64 - sub % self.p as u64) % self.p as u64) as u32;
                    }
                }
            }
        }
        prod.truncate(r);
        self.from_coeffs(&prod)
    }

    pub fn inv(&self, a: Fq) -> Fq {
        self.check(a);
        assert!(a.val != 0, "inverse of zero in F_{}", self.q);
        if self.r == 1 {
            let v = mod_inverse(a.val, self.p).expect("prime modulus");
            return Fq { val: v, q: self.q };
        }
        if !self.exp.is_empty() {
            let l = self.log[a.val as usize];
            let i = if l == 0 { 0 } else { self.q - 1 - l };
            return Fq {
                val: self.exp[i as usize],
                q: self.q,
            };
        }
        self.pow(a, self.q as u64 - 2)
    }

    #[inline]
    pub fn div(&self, a: Fq, b: Fq) -> Fq {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        self.check(a);
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    // ---- Quadratic character and square roots ----

    /// Quadratic character: `0` on zero, `+1` on nonzero squares, `-1` on
    /// non-squares.  Computed as `a^((q-1)/2)`; the table path shortcuts to
    /// the parity of the discrete log, which is the same thing.
    pub fn legendre(&self, a: Fq) -> i32 {
        self.check(a);
        if a.val == 0 {
            return 0;
        }
        if !self.exp.is_empty() {
            return if self.log[a.val as usize] % 2 == 0 { 1 } else { -1 };
        }
        let e = self.pow(a, (self.q as u64 - 1) / 2);
        if e.val == 1 {
            1
        } else {
            debug_assert_eq!(e, self.neg(self.one()));
            -1
        }
    }

    /// Canonical square root: `None` for non-squares, otherwise the root
    /// with the smaller packed representative (for prime fields this is the
    /// root `<= (q-1)/2`).
    pub fn sqrt(&self, a: Fq) -> Option<Fq> {
        self.check(a);
        if a.val == 0 {
            return Some(self.zero());
        }
        if !self.exp.is_empty() {
            let l = self.log[a.val as usize];
            if l % 2 != 0 {
                return None;
            }
            let root = Fq {
                val: self.exp[(l / 2) as usize],
                q: self.q,
            };
            return Some(self.canonical_root(root));
        }
        if self.legendre(a) == -1 {
            return None;
        }
        Some(self.canonical_root(self.tonelli_shanks(a)))
    }

    #[inline]
    fn canonical_root(&self, root: Fq) -> Fq {
        let other = self.neg(root);
        if other.val < root.val {
            other
        } else {
            root
        }
    }

    /// Tonelli–Shanks on top of the generic field operations; valid for any
    /// odd `q`.  Precondition: `a` is a nonzero square.
    fn tonelli_shanks(&self, a: Fq) -> Fq {
        let q1 = self.q as u64 - 1;
        let s = q1.trailing_zeros();
        let m = q1 >> s;
        if s == 1 {
            // q = 3 mod 4: direct exponentiation.
            return self.pow(a, (self.q as u64 + 1) / 4);
        }
        // Deterministic scan for a non-residue.
        let z = self
            .elements()
            .find(|&x| self.legendre(x) == -1)
            .expect("odd field has non-residues");
        let mut c = self.pow(z, m);
        let mut t = self.pow(a, m);
        let mut root = self.pow(a, (m + 1) / 2);
        let mut e = s;
        while t.val != 1 {
            // Find least i with t^(2^i) = 1.
            let mut i = 0;
            let mut probe = t;
            while probe.val != 1 {
                probe = self.mul(probe, probe);
                i += 1;
            }
            debug_assert!(i < e);
            let mut b = c;
            for _ in 0..e - i - 1 {
                b = self.mul(b, b);
            }
            root = self.mul(root, b);
            c = self.mul(b, b);
            t = self.mul(t, c);
            e = i;
        }
        root
    }

    // ---- Table construction ----

    fn build_tables(&mut self) {
        let g = self.find_generator();
        let mut exp = vec![0u32; (self.q - 1) as usize];
        let mut log = vec![0u32; self.q as usize];
        let mut acc = self.one();
        for i in 0..(self.q - 1) as usize {
            exp[i] = acc.val;
            log[acc.val as usize] = i as u32;
            acc = self.mul_schoolbook(acc, g);
        }
        debug_assert_eq!(acc.val, 1, "generator order must be q-1");
        self.exp = exp;
        self.log = log;
    }

    /// Smallest (by packed value) generator of the multiplicative group.
    fn find_generator(&self) -> Fq {
        let q1 = self.q as u64 - 1;
        let factors = prime_factors(q1);
        'outer: for v in 2..self.q {
            let g = Fq { val: v, q: self.q };
            for &f in &factors {
                if self.pow_schoolbook(g, q1 / f).val == 1 {
                    continue 'outer;
                }
            }
            return g;
        }
        unreachable!("multiplicative group of a finite field is cyclic");
    }

    fn pow_schoolbook(&self, a: Fq, mut e: u64) -> Fq {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_schoolbook(acc, base);
            }
            base = self.mul_schoolbook(base, base);
            e >>= 1;
        }
        acc
    }
}

/// Embedding of one field into an extension of it (same characteristic,
/// compatible degrees).  Determined by a deterministic choice of root of the
/// source modulus in the destination field.
pub struct Embedding<'a> {
    src: &'a FieldCtx,
    dst: &'a FieldCtx,
    /// Powers `theta^0..theta^{r_src - 1}` of the chosen root.
    powers: Vec<Fq>,
}

impl<'a> Embedding<'a> {
    pub fn new(src: &'a FieldCtx, dst: &'a FieldCtx) -> Result<Self, FieldError> {
        let err = FieldError::NoEmbedding {
            src: src.q,
            dst: dst.q,
        };
        if src.p != dst.p || dst.r % src.r != 0 {
            return Err(err);
        }
        if src.r == 1 {
            // Prime subfield: x plays no role, constants map to constants.
            return Ok(Embedding {
                src,
                dst,
                powers: vec![dst.one()],
            });
        }
        // Find the first root (in packed order) of the source modulus.
        let theta = dst
            .elements()
            .find(|&t| {
                // Horner evaluation of x^r + sum c_i x^i at t.
                let mut acc = dst.one();
                for &c in src.modulus.iter().rev() {
                    acc = dst.add(dst.mul(acc, t), dst.elem(c as i64));
                }
                acc.is_zero()
            })
            .ok_or(err)?;
        let mut powers = Vec::with_capacity(src.r as usize);
        let mut acc = dst.one();
        for _ in 0..src.r {
            powers.push(acc);
            acc = dst.mul(acc, theta);
        }
        Ok(Embedding { src, dst, powers })
    }

    pub fn apply(&self, a: Fq) -> Fq {
        let coeffs = self.src.coeffs(a);
        let mut acc = self.dst.zero();
        for (c, &pw) in coeffs.iter().zip(&self.powers) {
            if *c != 0 {
                acc = self.dst.add(acc, self.dst.mul(self.dst.elem(*c as i64), pw));
            }
        }
        acc
    }
}

// ---- Free helpers ----

fn is_prime_u32(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n as u64 {
        if n as u64 % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Inverse of `a` modulo prime `p` by the extended Euclidean algorithm.
fn mod_inverse(a: u32, p: u32) -> Option<u32> {
    if a == 0 {
        return None;
    }
    let (mut r0, mut r1) = (p as i64, a as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (t0, t1) = (t1, t0 - quot * t1);
    }
    debug_assert_eq!(r0, 1, "modulus must be prime");
    Some(t0.rem_euclid(p as i64) as u32)
}

/// Lexicographically smallest (low-degree coefficients compared first) monic
/// irreducible of degree `r` over `F_p`.  Returns the low coefficients.
fn smallest_irreducible(p: u32, r: u32) -> Vec<u32> {
    let r = r as usize;
    // Iterate coefficient vectors in lex order with c_0 the most significant
    // comparator, testing irreducibility by trial division against every
    // monic polynomial of degree 1..=r/2.
    let mut coeffs = vec![0u32; r];
    loop {
        if coeffs[0] != 0 && is_irreducible(p, &coeffs) {
            return coeffs;
        }
        // Odometer increment, last coefficient fastest.
        let mut k = r;
        loop {
            debug_assert!(k > 0, "no irreducible of degree {r} over F_{p}?");
            k -= 1;
            coeffs[k] += 1;
            if coeffs[k] < p {
                break;
            }
            coeffs[k] = 0;
        }
    }
}

/// Trial-division irreducibility test for the monic polynomial with the given
/// low coefficients (`x^r + c_{r-1} x^{r-1} + ... + c_0`, constant term
/// nonzero).
fn is_irreducible(p: u32, low: &[u32]) -> bool {
    let r = low.len();
    for d in 1..=r / 2 {
        // All monic divisor candidates of degree d, low coefficients as the
        // base-p digits of k.
        let mut count: u64 = 1;
        for _ in 0..d {
            count *= p as u64;
        }
        let mut div = vec![0u32; d];
        for k in 0..count {
            let mut kk = k;
            for c in div.iter_mut() {
                *c = (kk % p as u64) as u32;
                kk /= p as u64;
            }
            if poly_divides(p, &div, low) {
                return false;
            }
        }
    }
    true
}

/// Does the monic polynomial with low coefficients `div` divide the monic
/// polynomial with low coefficients `poly` (degrees `div.len()`, `poly.len()`)?
fn poly_divides(p: u32, div: &[u32], poly: &[u32]) -> bool {
    let n = poly.len();
    let d = div.len();
    // rem starts as the full dividend including its leading 1.
    let mut rem: Vec<u64> = poly.iter().map(|&c| c as u64).collect();
    rem.push(1);
    for k in (d..=n).rev() {
        let lead = rem[k] % p as u64;
        if lead != 0 {
            rem[k] = 0;
            for (i, &c) in div.iter().enumerate() {
                let idx = k - d + i;
                rem[idx] = (rem[idx] + (p as u64 - lead) * c as u64) % p as u64;
            }
        }
    }
    rem.iter().take(d).all(|&c| c % p as u64 == 0)
}
