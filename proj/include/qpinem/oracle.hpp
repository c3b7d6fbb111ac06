#pragma once

#include <optional>

#include "qpinem/interaction.hpp"

namespace qpinem {

// Brute-force reference: builds the generator g b a^dagger - g^* b^dagger a on a
// truncated (photon x open electron ladder) space and exponentiates it directly.
struct OracleOptions {
  // Extra Fock levels beyond the input cutoff.
  int photon_padding = 30;
  // Ladder half-width L; chosen from the coupling when unset.
  std::optional<int> half_width;
  double leakage_tol = 1e-10;
  int max_retries = 4;
  // Classical drive applied to the electron before the quantum stage, as the field
  // amplitude alpha_LO (the electron sees g alpha_LO^*).
  std::optional<cplx> lo_field;
};

InteractionOutcome oracle_spectrum(const PhotonicState& state, Coupling g,
                                   const OracleOptions& opts = {});

// Two independent modes prepared in coherent states, each coupled with g to the same
// electron. Used to check multi-point composition.
ElectronSpectrum oracle_two_mode_spectrum(cplx alpha1, cplx alpha2, int cutoff, Coupling g,
                                          const OracleOptions& opts = {});

}  // namespace qpinem
