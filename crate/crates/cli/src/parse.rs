use poisson_groupoid::C64 as Complex64;

use crate::Failure;

pub fn floats(what: &str, s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("{what}: cannot parse `{t}` as a number"))))
        .collect()
}

pub fn floats_n(what: &str, s: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let v = floats(what, s)?;
    if v.len() != n {
        return Err(Failure::Usage(format!("{what}: expected {n} comma separated numbers, got {}", v.len())));
    }
    Ok(v)
}

pub fn complex(what: &str, s: &str) -> Result<Complex64, Failure> {
    let v = floats_n(what, s, 2)?;
    Ok(Complex64::new(v[0], v[1]))
}
