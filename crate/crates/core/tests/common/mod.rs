#![allow(dead_code)]

use trilayer_core::interfaces::Model;
use trilayer_core::model::{LinearRates, ModelConfig, Rates};
use trilayer_core::stationary::CriticalValues;

pub fn canonical() -> Model {
    Model::new(ModelConfig::canonical().validate().unwrap()).unwrap()
}

pub fn with_linear(edit: impl FnOnce(&mut ModelConfig, &mut LinearRates)) -> Model {
    let mut cfg = ModelConfig::canonical();
    let Rates::Linear(mut l) = cfg.rates.clone() else { unreachable!() };
    edit(&mut cfg, &mut l);
    cfg.rates = Rates::Linear(l);
    Model::new(cfg.validate().unwrap()).unwrap()
}

pub fn canonical_critical() -> CriticalValues {
    canonical().critical_values().unwrap()
}

pub fn sinhc_root(q: f64) -> f64 {
    let (mut lo, mut hi): (f64, f64) = (1e-9, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.sinh() / mid < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}
