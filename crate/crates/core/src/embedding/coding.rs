//! Zero-dimensional coding maps: `ψ: Y → [0,1]`, the interleaving
//! `φ: [0,1] × {1..ℓ} → [0,1]`, and the final compositions into a cubical
//! shift.

use num_traits::{One, Zero};

use crate::embedding::{trajectory_block, Evaluate};
use crate::error::{Error, Result};
use crate::scalar::{int, ratio, Rational, Scalar};
use crate::systems::{OdometerPoint, ProductPoint};
use crate::window::FiniteWindow;

/// `ψ(y) = Σ_i 2 y_i 3^{-(i+1)}`, summed exactly over the preperiod and the
/// geometric series of the period.
pub fn cantor_code(y: &OdometerPoint) -> Rational {
    let third = ratio(1, 3);
    let mut scale = Rational::one();
    let mut pre = Rational::zero();
    for &d in y.preperiod() {
        scale *= &third;
        if d == 1 {
            pre += int(2) * &scale;
        }
    }
    let mut per_scale = Rational::one();
    let mut per = Rational::zero();
    for &d in y.period() {
        per_scale *= &third;
        if d == 1 {
            per += int(2) * &per_scale;
        }
    }
    // Σ_{r≥0} per · 3^{-r·q} = per / (1 − 3^{-q}).
    pre + scale * per / (int(1) - per_scale)
}

/// `φ(t, j) = (j−1)/ℓ + t/(2ℓ)`; the images of distinct `j` lie in the
/// disjoint intervals `[(j−1)/ℓ, (j−1)/ℓ + 1/(2ℓ)]`.
pub fn interleave_phi<T: Scalar>(t: &T, j: usize, l: usize) -> Result<T> {
    if l == 0 || j == 0 || j > l {
        return Err(Error::InvalidArgument(format!("symbol index {j} outside 1..={l}")));
    }
    let l_t = T::from_int(l as i64);
    Ok(T::from_int(j as i64 - 1) / l_t.clone() + t.clone() / (T::from_int(2) * l_t))
}

/// A coding of `Y` by symbols `1..=ℓ`, read along orbits: the symbolic
/// image of `y` is `(symbol(β_g y))_g`.
pub trait SymbolCoding {
    fn alphabet_size(&self) -> usize;

    fn symbol(&self, y: &OdometerPoint) -> usize;
}

/// `y ↦ y_0 + 1` with `ℓ = 2`. The induced orbit coding only records the
/// parity class, so it is not injective; no continuous equivariant coding
/// of the odometer into a finite-alphabet shift is.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DigitCoding;

impl SymbolCoding for DigitCoding {
    fn alphabet_size(&self) -> usize {
        2
    }

    fn symbol(&self, y: &OdometerPoint) -> usize {
        y.digit(0) as usize + 1
    }
}

/// `y ↦ (y mod 2^r) + 1` with `ℓ = 2^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidueCoding {
    pub digits: u32,
}

impl SymbolCoding for ResidueCoding {
    fn alphabet_size(&self) -> usize {
        1 << self.digits
    }

    fn symbol(&self, y: &OdometerPoint) -> usize {
        y.residue(self.digits) as usize + 1
    }
}

/// Which final composition to build.
pub enum FinalCoding<'a> {
    /// `(I_f × π)` followed by `id × ψ̄`: blocks in `([0,1]^{m+1})^W`.
    Cantor,
    /// The last coordinate of `f` is interleaved with the symbol of `π(x)`:
    /// blocks in `([0,1]^m)^W`.
    Symbolic(Option<&'a dyn SymbolCoding>),
}

/// The composed map on the window `W`.
pub fn compose_final<T: Scalar, F: Evaluate<T> + ?Sized>(
    f: &F,
    coding: &FinalCoding<'_>,
    x: &ProductPoint,
    w: &FiniteWindow,
) -> Result<Vec<Vec<T>>> {
    let block = trajectory_block(f, x, w)?;
    match coding {
        FinalCoding::Cantor => Ok(block
            .into_iter()
            .zip(w.iter())
            .map(|(mut v, g)| {
                v.push(T::from_rational(&cantor_code(&x.y.add_int(g))));
                v
            })
            .collect()),
        FinalCoding::Symbolic(None) => Err(Error::MissingCoding),
        FinalCoding::Symbolic(Some(c)) => block
            .into_iter()
            .zip(w.iter())
            .map(|(mut v, g)| {
                let last = v.pop().ok_or(Error::InvalidArgument("map has no coordinates".into()))?;
                v.push(interleave_phi(&last, c.symbol(&x.y.add_int(g)), c.alphabet_size())?);
                Ok(v)
            })
            .collect(),
    }
}
