use super::{Kind, SmoothFn};
use crate::error::{Error, Result};
use crate::quadrature;
use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::marker::PhantomData;
use std::sync::Mutex;

/// Hasher for pointer-sized keys.
#[derive(Default)]
struct PtrHasher(u64);

impl Hasher for PtrHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 = (self.0 ^ u64::from(*b)).wrapping_mul(0x100_0000_01b3);
        }
    }
    fn write_usize(&mut self, n: usize) {
        self.0 = (n as u64 >> 3).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
    fn write_u64(&mut self, n: u64) {
        self.0 = n.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (n >> 29);
    }
}

type PtrMap<V> = HashMap<usize, V, BuildHasherDefault<PtrHasher>>;
type BitsMap = HashMap<u64, f64, BuildHasherDefault<PtrHasher>>;

const POINT_CACHE_CAP: usize = 1 << 15;

/// Evaluates functions at one point, sharing the values of common
/// sub-nodes between every function evaluated through it.
///
/// The borrow ties the cache to functions that outlive the evaluator, so
/// node addresses used as keys cannot be recycled while it is alive.
pub struct Evaluator<'a> {
    r: f64,
    cache: PtrMap<f64>,
    _borrow: PhantomData<&'a SmoothFn>,
}

impl<'a> Evaluator<'a> {
    pub fn new(r: f64) -> Self {
        Evaluator {
            r,
            cache: PtrMap::default(),
            _borrow: PhantomData,
        }
    }

    pub fn point(&self) -> f64 {
        self.r
    }

    pub fn eval(&mut self, f: &'a SmoothFn) -> Result<f64> {
        if !f.domain().contains(self.r) {
            return Err(Error::Domain {
                r: self.r,
                domain: f.domain(),
            });
        }
        self.eval_node(f)
    }

    fn eval_node(&mut self, f: &'a SmoothFn) -> Result<f64> {
        let r = self.r;
        // cheap leaves skip the cache
        match &f.0.kind {
            Kind::Polynomial(p) => return Ok(horner(p, r)),
            Kind::Power { coeff, exponent } => {
                if !f.domain().contains(r) {
                    return Err(Error::Domain {
                        r,
                        domain: f.domain(),
                    });
                }
                return finite(coeff * r.powf(*exponent), r);
            }
            _ => {}
        }
        let key = f.cache_key();
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let v = match &f.0.kind {
            Kind::Polynomial(_) | Kind::Power { .. } => unreachable!(),
            Kind::Exp(a) => self.eval_node(a)?.exp(),
            Kind::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += self.eval_node(t)?;
                }
                acc
            }
            Kind::Product(fs) => {
                let mut acc = 1.0;
                for t in fs {
                    acc *= self.eval_node(t)?;
                }
                acc
            }
            Kind::Scale(c, g) => c * self.eval_node(g)?,
            Kind::Reciprocal(g) => {
                let d = self.eval_node(g)?;
                if d == 0.0 {
                    return Err(Error::SignChange { r });
                }
                1.0 / d
            }
            Kind::Compose { outer, inner } => {
                let u = self.eval_node(inner)?;
                outer.eval(u)?
            }
            Kind::Antiderivative(core) => core.value(r)?,
            Kind::RiccatiLambda(core) => {
                if !f.domain().contains(r) {
                    return Err(Error::Domain {
                        r,
                        domain: f.domain(),
                    });
                }
                core.value(r)?
            }
            Kind::Flow { core, speed } => {
                if *speed {
                    core.speed(r)?
                } else {
                    core.position(r)?
                }
            }
            Kind::Restrict(g) => {
                if !f.domain().contains(r) {
                    return Err(Error::Domain {
                        r,
                        domain: f.domain(),
                    });
                }
                self.eval_node(g)?
            }
        };
        let v = finite(v, r)?;
        self.cache.insert(key, v);
        Ok(v)
    }
}

fn horner(p: &[f64], r: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * r + c)
}

fn finite(v: f64, r: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { r })
    }
}

/// Bounded memo of point values. Values are a pure function of the point,
/// so clearing it never changes results.
pub(super) struct PointCache(Mutex<BitsMap>);

impl PointCache {
    pub(super) fn new() -> Self {
        PointCache(Mutex::new(BitsMap::default()))
    }

    pub(super) fn get(&self, r: f64) -> Option<f64> {
        self.0.lock().unwrap().get(&r.to_bits()).copied()
    }

    pub(super) fn put(&self, r: f64, v: f64) {
        let mut m = self.0.lock().unwrap();
        if m.len() >= POINT_CACHE_CAP {
            m.clear();
        }
        m.insert(r.to_bits(), v);
    }
}

/// Backing state of an antiderivative node: cumulative integrals at the
/// checkpoints `base + k * step`, filled outward from the base on demand.
pub(super) struct Cumulative {
    integrand: SmoothFn,
    base: f64,
    step: f64,
    tol: f64,
    checkpoints: Mutex<HashMap<i64, f64>>,
    points: PointCache,
}

impl Cumulative {
    pub(super) fn new(integrand: SmoothFn, base: f64, step: f64, tol: f64) -> Self {
        Cumulative {
            integrand,
            base,
            step,
            tol,
            checkpoints: Mutex::new(HashMap::new()),
            points: PointCache::new(),
        }
    }

    pub(super) fn integrand(&self) -> &SmoothFn {
        &self.integrand
    }

    pub(super) fn base(&self) -> f64 {
        self.base
    }

    fn segment(&self, a: f64, b: f64) -> Result<f64> {
        let g = &self.integrand;
        Ok(quadrature::integrate(|s| g.eval(s), a, b, self.tol)?.value)
    }

    fn checkpoint(&self, k: i64) -> Result<f64> {
        if k == 0 {
            return Ok(0.0);
        }
        let dir = k.signum();
        let (mut j, mut acc) = {
            let map = self.checkpoints.lock().unwrap();
            if let Some(v) = map.get(&k) {
                return Ok(*v);
            }
            let mut j = k - dir;
            while j != 0 && !map.contains_key(&j) {
                j -= dir;
            }
            (j, if j == 0 { 0.0 } else { map[&j] })
        };
        // integrate outside the lock; the sequence of segments is fixed, so
        // concurrent fills compute identical values
        let mut fresh = Vec::new();
        while j != k {
            let a = self.base + j as f64 * self.step;
            let b = self.base + (j + dir) as f64 * self.step;
            acc += self.segment(a, b)?;
            j += dir;
            fresh.push((j, acc));
        }
        let mut map = self.checkpoints.lock().unwrap();
        for (idx, v) in fresh {
            map.entry(idx).or_insert(v);
        }
        Ok(map[&k])
    }

    pub(super) fn value(&self, r: f64) -> Result<f64> {
        if r == self.base {
            return Ok(0.0);
        }
        if let Some(v) = self.points.get(r) {
            return Ok(v);
        }
        let k = ((r - self.base) / self.step).trunc() as i64;
        let start = self.base + k as f64 * self.step;
        let v = self.checkpoint(k)? + self.segment(start, r)?;
        self.points.put(r, v);
        Ok(v)
    }
}

/// Backing state of a Riccati deformation node.
pub(super) struct LambdaCore {
    w: SmoothFn,
    c: f64,
    phi: SmoothFn,
    integral: SmoothFn,
    points: PointCache,
}

impl LambdaCore {
    pub(super) fn new(w: SmoothFn, c: f64, phi: SmoothFn, integral: SmoothFn) -> Self {
        LambdaCore {
            w,
            c,
            phi,
            integral,
            points: PointCache::new(),
        }
    }

    pub(super) fn superpotential(&self) -> &SmoothFn {
        &self.w
    }

    pub(super) fn constant(&self) -> f64 {
        self.c
    }

    pub(super) fn value(&self, r: f64) -> Result<f64> {
        if let Some(v) = self.points.get(r) {
            return Ok(v);
        }
        let num = (-2.0 * self.phi.eval(r)?).exp();
        let den = self.c + self.integral.eval(r)?;
        if den == 0.0 {
            return Err(Error::SignChange { r });
        }
        let v = finite(num / den, r)?;
        self.points.put(r, v);
        Ok(v)
    }
}
