#pragma once

/// Umbrella header: closed-form microstrip models, the series-fed array
/// chain, far-field synthesis, geometry search, and the file formats.

#include "patchkit/constants.hpp"
#include "patchkit/errors.hpp"
#include "patchkit/farfield.hpp"
#include "patchkit/geometry_io.hpp"
#include "patchkit/microstrip.hpp"
#include "patchkit/network.hpp"
#include "patchkit/optimize.hpp"
#include "patchkit/report.hpp"
#include "patchkit/textio.hpp"
#include "patchkit/touchstone.hpp"
