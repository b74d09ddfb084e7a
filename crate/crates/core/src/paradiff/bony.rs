use crate::error::{Error, Result};
use crate::lp::DyadicFilterBank;
use crate::spectral::{dealias, Field};

/// The three pieces of `uv = T_u v + T_v u + R(u, v)`.
#[derive(Debug, Clone)]
pub struct BonyParts {
    pub t_uv: Field,
    pub t_vu: Field,
    pub remainder: Field,
}

impl BonyParts {
    pub fn sum(&self) -> Field {
        &(&self.t_uv + &self.t_vu) + &self.remainder
    }
}

fn check(u: &Field, v: &Field, bank: &DyadicFilterBank) -> Result<()> {
    if u.grid() != v.grid() || u.grid() != bank.grid() {
        return Err(Error::GridMismatch);
    }
    if !(u.is_scalar() || v.is_scalar() || u.components() == v.components()) {
        return Err(Error::ComponentMismatch { expected: u.components(), got: v.components() });
    }
    Ok(())
}

fn paraproduct_from_blocks(bank: &DyadicFilterBank, low: &[Field], high: &[Field]) -> Field {
    let ladder = bank.low_pass_ladder(low);
    // S_{q-1} vanishes for q <= 0, so only q >= 1 contributes.
    let mut acc: Option<Field> = None;
    for (s, d) in ladder.iter().zip(high).skip(2) {
        let term = s * d;
        acc = Some(match acc {
            Some(a) => &a + &term,
            None => term,
        });
    }
    let acc = acc.unwrap_or_else(|| &low[0] * &high[0].scale(0.0));
    dealias(&acc)
}

fn remainder_from_blocks(bu: &[Field], bv: &[Field]) -> Field {
    let n = bu.len();
    let mut acc: Option<Field> = None;
    for q in 0..n {
        let mut near = bv[q].clone();
        if q > 0 {
            near = &near + &bv[q - 1];
        }
        if q + 1 < n {
            near = &near + &bv[q + 1];
        }
        let term = &bu[q] * &near;
        acc = Some(match acc {
            Some(a) => &a + &term,
            None => term,
        });
    }
    dealias(&acc.expect("a bank has at least three levels"))
}

/// `T_u v = sum_q S_{q-1} u Delta_q v`.
pub fn paraproduct(u: &Field, v: &Field, bank: &DyadicFilterBank) -> Result<Field> {
    check(u, v, bank)?;
    Ok(paraproduct_from_blocks(bank, &bank.blocks(u), &bank.blocks(v)))
}

/// `R(u, v) = sum_q Delta_q u (Delta_{q-1} v + Delta_q v + Delta_{q+1} v)`.
pub fn remainder(u: &Field, v: &Field, bank: &DyadicFilterBank) -> Result<Field> {
    check(u, v, bank)?;
    let (bu, bv) = (bank.blocks(u), bank.blocks(v));
    // Evaluate on the canonical pair order so that R(u, v) and R(v, u) agree bit for bit.
    let r = if u.values() <= v.values() { remainder_from_blocks(&bu, &bv) } else { remainder_from_blocks(&bv, &bu) };
    Ok(r)
}

/// All three Bony pieces from one set of block decompositions.
pub fn bony_decomposition(u: &Field, v: &Field, bank: &DyadicFilterBank) -> Result<BonyParts> {
    check(u, v, bank)?;
    let (bu, bv) = (bank.blocks(u), bank.blocks(v));
    Ok(BonyParts {
        t_uv: paraproduct_from_blocks(bank, &bu, &bv),
        t_vu: paraproduct_from_blocks(bank, &bv, &bu),
        remainder: remainder_from_blocks(&bu, &bv),
    })
}
