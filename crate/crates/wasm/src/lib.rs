//! wasm-bindgen wrapper used by `www/index.html`.
//!
//! Build with `wasm-pack build --target web crates/wasm` and serve `crates/wasm`.

use onelevel::curve::CurveData;
use onelevel::density::{so_even_limit, DensityMode, DensityModel, FamilyView, Scale};
use onelevel::discriminant::enumerate_family;
use wasm_bindgen::prelude::*;

/// Largest X the page will enumerate.
pub const MAX_ENUMERATED_X: f64 = 200_000.0;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    curve: CurveData,
    model: DensityModel,
}

#[wasm_bindgen]
impl Demo {
    /// Builds the E11 model. The sym² cutoff dominates the cost.
    #[wasm_bindgen(constructor)]
    pub fn new(prime_cutoff: u32, sym_cutoff: u32) -> Result<Demo, JsError> {
        let (pc, sc) = (prime_cutoff.max(100) as u64, sym_cutoff.max(1000) as u64);
        let curve = CurveData::new("11a3", [0, -1, 1, 0, 0], 11, pc.max(sc)).map_err(js)?;
        let model = DensityModel::new(&curve, pc, sc).map_err(js)?;
        Ok(Demo { curve, model })
    }

    /// Rows of (tau, scaled density, SO(even) limit) flattened, in the large-X closed form.
    pub fn scaled_vs_so(&self, x: f64, tau_max: f64, n: u32) -> Result<Vec<f64>, JsError> {
        let taus = grid(tau_max, n)?;
        let fam = FamilyView::closed_form(self.curve.m, x).map_err(js)?;
        let c = self.model.curve(&taus, &fam, Scale::Scaled).map_err(js)?;
        Ok(taus
            .iter()
            .zip(&c.values)
            .flat_map(|(&t, &v)| [t, v, so_even_limit(t)])
            .collect())
    }

    /// Rows of (t, normalized density) flattened, summing over the enumerated family up to X.
    pub fn density_at_x(&self, x: f64, t_max: f64, n: u32) -> Result<Vec<f64>, JsError> {
        if !(x >= 100.0 && x <= MAX_ENUMERATED_X) {
            return Err(JsError::new(&format!("X must lie in [100, {MAX_ENUMERATED_X}]")));
        }
        let ts = grid(t_max, n)?;
        let fam = enumerate_family(&self.curve, x as u64);
        let view = FamilyView::from_family(&fam, DensityMode::Exact).map_err(js)?;
        let c = self.model.curve(&ts, &view, Scale::Unscaled).map_err(js)?;
        Ok(ts.iter().zip(&c.normalized).flat_map(|(&t, &v)| [t, v]).collect())
    }

    /// Number of twists up to X with χ_d(−11)ω = +1.
    pub fn family_size(&self, x: f64) -> Result<u32, JsError> {
        if !(x >= 1.0 && x <= MAX_ENUMERATED_X) {
            return Err(JsError::new("X out of range"));
        }
        Ok(enumerate_family(&self.curve, x as u64).x_star() as u32)
    }

    /// (a₁, a₂) of the 1/L expansion.
    pub fn expansion(&self) -> Vec<f64> {
        let (a1, a2) = self.model.expansion_coeffs();
        vec![a1, a2]
    }

    /// Primes p ≤ n_max paired with a_p, flattened.
    pub fn traces(&self, n_max: u32) -> Result<Vec<i32>, JsError> {
        let n = (n_max as u64).min(self.curve.p_max());
        let mut out = Vec::new();
        for p in 2..=n {
            if is_prime(p) {
                out.push(p as i32);
                out.push(self.curve.a_p(p).map_err(js)? as i32);
            }
        }
        Ok(out)
    }
}

fn grid(max: f64, n: u32) -> Result<Vec<f64>, JsError> {
    if !(max > 0.0) || n < 2 || n > 20_000 {
        return Err(JsError::new("need max > 0 and 2 <= points <= 20000"));
    }
    Ok((0..n).map(|i| max * i as f64 / (n - 1) as f64).collect())
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| n % k != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = grid(2.0, 5).unwrap();
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn primes() {
        let ps: Vec<u64> = (1..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }
}
