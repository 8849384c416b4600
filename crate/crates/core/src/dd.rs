//! Double-double arithmetic, just enough for unit phases `e^{i theta}`
//! accurate to about `1e-30`.

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    pub fn prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Dd { hi: p, lo: a.mul_add(b, -p) }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        quick_two_sum(s, e + self.lo + o.lo)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = Dd::prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let p = Dd::prod(self.hi, b);
        quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q = self.hi / b;
        let p = Dd::prod(q, b);
        let r = ((self.hi - p.hi) - p.lo + self.lo) / b;
        quick_two_sum(q, r)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

const TWO_PI: [f64; 3] = [6.283_185_307_179_586, 2.449_293_598_294_706_4e-16, -5.989_539_619_436_679e-33];
const HALF_PI: [f64; 3] = [1.570_796_326_794_896_6, 6.123_233_995_736_766e-17, -1.497_384_904_859_169_8e-33];

fn subtract_multiple(x: Dd, k: f64, c: &[f64; 3]) -> Dd {
    let mut r = x;
    for part in c {
        r = r.add(Dd::prod(-k, *part));
    }
    r
}

/// `(cos theta, sin theta)`.
pub(crate) fn cis(theta: Dd) -> (Dd, Dd) {
    let k = (theta.hi / TWO_PI[0]).round();
    let t = subtract_multiple(theta, k, &TWO_PI);
    let j = (t.hi / HALF_PI[0]).round();
    let r = subtract_multiple(t, j, &HALF_PI);
    let r2 = r.mul(r);
    let (mut s, mut c) = (r, Dd::new(1.0));
    let (mut ts, mut tc) = (r, Dd::new(1.0));
    for n in 1..=14 {
        let n = n as f64;
        ts = ts.mul(r2).div_f64(-(2.0 * n) * (2.0 * n + 1.0));
        tc = tc.mul(r2).div_f64(-(2.0 * n - 1.0) * (2.0 * n));
        s = s.add(ts);
        c = c.add(tc);
    }
    match (j as i64).rem_euclid(4) {
        0 => (c, s),
        1 => (s.neg(), c),
        2 => (c.neg(), s.neg()),
        _ => (s, c.neg()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cis_matches_libm() {
        for x in [0.0, 0.3, -1.2, 2.9, 7.5, -40.1, 90.25] {
            let (c, s) = cis(Dd::new(x));
            assert!((c.to_f64() - x.cos()).abs() < 2e-16);
            assert!((s.to_f64() - x.sin()).abs() < 2e-16);
        }
    }

    #[test]
    fn pythagoras_holds_beyond_double() {
        for x in [0.1, 1.0, 2.5, -3.0, 55.5] {
            let (c, s) = cis(Dd::new(x));
            let one = c.mul(c).add(s.mul(s)).add(Dd::new(-1.0));
            assert!(one.to_f64().abs() < 1e-29, "{x}: {one:?}");
        }
    }

    #[test]
    fn products_are_exact() {
        let p = Dd::prod(0.1, 3.0);
        assert_eq!(p.hi, 0.1 * 3.0);
        assert!(p.lo != 0.0);
        let q = Dd::new(1.0).div_f64(3.0).mul_f64(3.0);
        assert!((q.to_f64() - 1.0).abs() < 1e-30 + f64::EPSILON / 4.0);
    }
}
