#pragma once

#include <vector>

#include "flagmult/grid.hpp"

namespace flagmult::detail {

// spectrum with the Nyquist lines cleared
Spectrum clean_spectrum(const SampledFunction& f);
// mode list of a spectrum; throws OracleTooLarge (oracle) or PlanError above cap
ModeList sparse_modes(const Spectrum& s, std::size_t cap, bool oracle);
// copy coefficients into a larger grid with the same periods
Spectrum embed(const Spectrum& s, const GridSpec& big);
// in-band part of a padded spectrum, Nyquist lines cleared
Spectrum restrict_band(const Spectrum& big, const GridSpec& g);
int extent(const Spectrum& s, int axis);
// doubles each axis on which the summed spectral extents reach the band edge
GridSpec padded_grid(const std::vector<const Spectrum*>& in, bool* padded);

}  // namespace flagmult::detail
