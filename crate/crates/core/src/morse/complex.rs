use super::flow::MorseData;
use crate::coeff::{CoefficientSystem, Variance};
use crate::complexes::{ChainComplex, Ring};
use crate::linalg::IntMatrix;
use crate::specseq::FilteredComplex;
use crate::{Error, Result};

/// Block offsets of each orbit inside its degree.
fn layout(data: &MorseData, coeff: &CoefficientSystem) -> (Vec<usize>, Vec<usize>) {
    let mut ranks = vec![0; data.dim + 1];
    let mut offset = vec![0; data.orbits.len()];
    for (o, orbit) in data.orbits.iter().enumerate() {
        offset[o] = ranks[orbit.index()];
        ranks[orbit.index()] += coeff.value(&orbit.rep.stabilizer).rank();
    }
    (ranks, offset)
}

/// `C_k = ⊕_{[p], index k} M(stab p)` with boundary blocks
/// `Σ count · M(morphism)`, over 𝔽₂.
pub fn morse_complex(data: &MorseData, coeff: &CoefficientSystem) -> Result<ChainComplex> {
    if coeff.ring() != Ring::Prime(2) {
        return Err(Error::Precondition(format!("Morse complexes use F2 coefficients, got {}", coeff.ring())));
    }
    if coeff.variance() != Variance::Covariant {
        return Err(Error::VarianceMismatch);
    }
    let (ranks, offset) = layout(data, coeff);
    let mut boundaries: Vec<IntMatrix> = (1..ranks.len()).map(|k| IntMatrix::zeros(ranks[k - 1], ranks[k])).collect();
    for flow in &data.flows {
        if flow.parity() == 0 {
            continue;
        }
        let k = data.orbits[flow.source].index();
        let block = coeff.induced_matrix(&flow.morphism);
        let (r0, c0) = (offset[flow.target], offset[flow.source]);
        let d = &mut boundaries[k - 1];
        for i in 0..block.rows() {
            for j in 0..block.cols() {
                d.add_to(r0 + i, c0 + j, block.get(i, j));
            }
        }
    }
    ChainComplex::new(Ring::Prime(2), 0, ranks, boundaries).map_err(|e| match e {
        Error::BoundaryNotNilpotent { degree } => Error::BoundarySquareNonzero { degree },
        other => other,
    })
}

/// The Morse complex filtered by Morse index.
pub fn morse_filtration(data: &MorseData, coeff: &CoefficientSystem) -> Result<FilteredComplex> {
    let c = morse_complex(data, coeff)?;
    let filt = c.degrees().map(|n| vec![n as usize; c.rank(n)]).collect();
    FilteredComplex::new(c, filt)
}
