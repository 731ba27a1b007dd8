//! A fully assembled well: parameters, Hamiltonian and spectrum together.

use crate::dynamics::{
    initial_coefficients, to_eigen_amplitudes, EigenAmplitudes, EvolutionSettings, ProjectedPacket,
};
use crate::error::Result;
use crate::hamiltonian::{build_matrix, diagonalize, spectral_gaps, BasisSpec, EigenSystem, EnergyMatrix, SpectralGaps};
use crate::model::{quartic_from_well, stationary_points, GaussianPacketSpec, PhysicalParams, QuarticCoefficients, StationaryPoints, WellShape};
use crate::observables::{half_line_overlaps, observe, ObservableSample, OverlapMatrix};

#[derive(Debug, Clone)]
pub struct DoubleWellSystem {
    pub params: PhysicalParams,
    pub well: WellShape,
    pub coeffs: QuarticCoefficients,
    pub basis: BasisSpec,
    pub matrix: EnergyMatrix,
    pub eigen: EigenSystem,
}

impl DoubleWellSystem {
    pub fn new(params: PhysicalParams, well: WellShape, n_max: usize) -> Result<Self> {
        params.validate()?;
        let coeffs = quartic_from_well(&params, &well)?;
        let basis = BasisSpec::new(n_max, &params)?;
        let matrix = build_matrix(&coeffs, &params, &basis);
        let eigen = diagonalize(&matrix)?;
        Ok(Self { params, well, coeffs, basis, matrix, eigen })
    }

    pub fn stationary_points(&self) -> Result<StationaryPoints> {
        stationary_points(&self.params, &self.well)
    }

    pub fn gaps(&self) -> SpectralGaps {
        spectral_gaps(&self.eigen)
    }

    pub fn project_packet(&self, spec: &GaussianPacketSpec) -> Result<ProjectedPacket> {
        initial_coefficients(spec, &self.params, &self.basis, self.well.x_s)
    }

    pub fn amplitudes(&self, packet: &ProjectedPacket) -> Result<EigenAmplitudes> {
        to_eigen_amplitudes(&packet.state, &self.eigen)
    }

    pub fn overlaps(&self) -> OverlapMatrix {
        half_line_overlaps(&self.eigen, &self.params)
    }

    /// Propagates `packet` and evaluates every observable at each output time.
    pub fn run(&self, packet: &ProjectedPacket, settings: &EvolutionSettings) -> Result<Vec<ObservableSample>> {
        let states = crate::dynamics::evolve(&packet.state, &self.matrix, &self.eigen, &self.params, settings)?;
        observe(&states, &packet.state, &self.params, &self.matrix, &self.eigen, &self.overlaps())
    }
}
