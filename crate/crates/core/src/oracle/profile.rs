use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A profile `g: [0, t_max] → ℝ₊` with `g(0) = 0` and its first two derivatives.
#[derive(Clone)]
pub struct Profile {
    pub name: String,
    g: ScalarFn,
    g_dot: ScalarFn,
    g_ddot: ScalarFn,
    pub strictly_increasing: bool,
    /// Upper end of the domain used for inversion.
    pub domain_max: f64,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile")
            .field("name", &self.name)
            .field("strictly_increasing", &self.strictly_increasing)
            .field("domain_max", &self.domain_max)
            .finish()
    }
}

impl Profile {
    pub fn new(
        name: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_dot: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_ddot: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            g: Arc::new(g),
            g_dot: Arc::new(g_dot),
            g_ddot: Arc::new(g_ddot),
            strictly_increasing: true,
            domain_max: 1.0,
        }
    }

    /// Widens the interval searched by [`Profile::inverse`].
    pub fn with_domain_max(mut self, domain_max: f64) -> Self {
        self.domain_max = domain_max;
        self
    }

    pub fn identity() -> Self {
        Self::new("identity", |t| t, |_| 1.0, |_| 0.0)
    }

    /// `g(t) = sin(π/2 · t)`
    pub fn sine() -> Self {
        Self::new(
            "sine",
            |t| (FRAC_PI_2 * t).sin(),
            |t| FRAC_PI_2 * (FRAC_PI_2 * t).cos(),
            |t| -FRAC_PI_2 * FRAC_PI_2 * (FRAC_PI_2 * t).sin(),
        )
    }

    /// `g(t) = tan(3/2 · t)`
    pub fn tangent() -> Self {
        Self::new(
            "tangent",
            |t| (1.5 * t).tan(),
            |t| 1.5 / (1.5 * t).cos().powi(2),
            |t| {
                let c = (1.5 * t).cos();
                4.5 * (1.5 * t).sin() / c.powi(3)
            },
        )
    }

    /// `g(t) = t²`, whose derivative vanishes at the curve.
    pub fn square() -> Self {
        Self::new("square", |t| t * t, |t| 2.0 * t, |_| 2.0)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Self::identity()),
            "sine" => Some(Self::sine()),
            "tangent" => Some(Self::tangent()),
            "square" => Some(Self::square()),
            _ => None,
        }
    }

    pub fn g(&self, t: f64) -> f64 {
        (self.g)(t)
    }

    pub fn g_dot(&self, t: f64) -> f64 {
        (self.g_dot)(t)
    }

    pub fn g_ddot(&self, t: f64) -> f64 {
        (self.g_ddot)(t)
    }

    /// `g₂(t) = g(t²)`, the profile along a normal ray parametrized by distance.
    pub fn g2(&self, t: f64) -> f64 {
        self.g(t * t)
    }

    /// `ġ₂(t) = 2t ġ(t²)`
    pub fn g2_dot(&self, t: f64) -> f64 {
        2.0 * t * self.g_dot(t * t)
    }

    /// `g̈₂(t) = 2ġ(t²) + 4t² g̈(t²)`
    pub fn g2_ddot(&self, t: f64) -> f64 {
        let s = t * t;
        2.0 * self.g_dot(s) + 4.0 * s * self.g_ddot(s)
    }

    /// Solves `g(t) = z` on `[0, domain_max]` by bisection-safeguarded Newton.
    /// Returns `None` if `z` lies outside `[0, g(domain_max)]`.
    pub fn inverse(&self, z: f64) -> Option<f64> {
        let top = self.g(self.domain_max);
        if !(z >= 0.0 && z <= top) {
            return None;
        }
        if z == 0.0 {
            return Some(0.0);
        }
        let (mut lo, mut hi) = (0.0, self.domain_max);
        let mut t = 0.5 * (lo + hi);
        for _ in 0..200 {
            let r = self.g(t) - z;
            if r == 0.0 {
                return Some(t);
            }
            if r < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            if hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
            let d = self.g_dot(t);
            let newton = t - r / d;
            t = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Some(t)
    }
}
