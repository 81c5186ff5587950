use super::{Graph, Tensor, Var};
use crate::{contract, Result};

/// Compares reverse-mode gradients against central differences.
///
/// `f` records a scalar function of its input node. The return value is the
/// largest `|analytic - numeric| / max(1, |numeric|)` over the coordinates of
/// `x`.
pub fn gradcheck<F>(f: F, x: &Tensor, h: f64) -> Result<f64>
where
    F: Fn(&mut Graph, Var) -> Result<Var>,
{
    if !(h > 0.0) {
        return Err(contract("gradcheck step must be positive"));
    }
    let mut g = Graph::new();
    let input = g.param(x.clone());
    let out = f(&mut g, input)?;
    let grads = g.backward(out)?;
    let analytic = match grads.get(input) {
        Some(t) => t.data().to_vec(),
        None => alloc::vec![0.0; x.numel()],
    };

    let eval = |t: Tensor| -> Result<f64> {
        let mut g = Graph::new();
        let v = g.constant(t);
        let out = f(&mut g, v)?;
        Ok(g.value(out).data()[0])
    };

    let mut worst = 0.0f64;
    let mut probe = x.clone();
    for i in 0..x.numel() {
        let base = x.data()[i];
        probe.data_mut()[i] = base + h;
        let plus = eval(probe.clone())?;
        probe.data_mut()[i] = base - h;
        let minus = eval(probe.clone())?;
        probe.data_mut()[i] = base;
        let numeric = (plus - minus) / (2.0 * h);
        let err = crate::math::abs(analytic[i] - numeric) / numeric.abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_exact() {
        let x = Tensor::matrix(2, 2, alloc::vec![0.3, -1.2, 4.0, 2.5]).unwrap();
        let err = gradcheck(|g, x| g.sum(x), &x, 1e-5).unwrap();
        assert!(err < 1e-10);
    }

    #[test]
    fn rejects_bad_step() {
        let x = Tensor::row(&[1.0]);
        assert!(gradcheck(|g, x| g.sum(x), &x, 0.0).is_err());
    }
}
