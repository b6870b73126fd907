#pragma once

// Umbrella header for the LLPD clustering toolkit.

#include "llpd/dendrogram.hpp"
#include "llpd/denoise.hpp"
#include "llpd/eigensolver.hpp"
#include "llpd/exact_llpd.hpp"
#include "llpd/generators.hpp"
#include "llpd/laplacian.hpp"
#include "llpd/metrics.hpp"
#include "llpd/neighbor_graph.hpp"
#include "llpd/point_cloud.hpp"
#include "llpd/random.hpp"
#include "llpd/report_io.hpp"
#include "llpd/scale_ladder.hpp"
#include "llpd/spectral.hpp"
#include "llpd/theory_bounds.hpp"
