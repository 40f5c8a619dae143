use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaReport {
    pub kappa: f64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    pub n: usize,
}

/// Cohen's kappa for two binary annotators with full agreement statistics.
pub fn kappa_report(a: &[bool], b: &[bool]) -> Result<KappaReport> {
    if a.len() != b.len() {
        return Err(Error::Eval(format!(
            "annotations differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Eval("no annotations".into()));
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let pa = a.iter().filter(|&&x| x).count() as f64 / n;
    let pb = b.iter().filter(|&&x| x).count() as f64 / n;
    let po = agree / n;
    let pe = pa * pb + (1.0 - pa) * (1.0 - pb);
    let kappa = if pe == 1.0 {
        if po == 1.0 {
            1.0
        } else {
            return Err(Error::Eval("kappa is undefined: chance agreement is 1".into()));
        }
    } else {
        (po - pe) / (1.0 - pe)
    };
    Ok(KappaReport {
        kappa,
        observed_agreement: po,
        expected_agreement: pe,
        n: a.len(),
    })
}

pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<f64> {
    kappa_report(a, b).map(|r| r.kappa)
}
