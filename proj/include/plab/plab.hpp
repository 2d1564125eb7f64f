#pragma once

#include "plab/configuration.hpp"
#include "plab/engine.hpp"
#include "plab/error.hpp"
#include "plab/experiments.hpp"
#include "plab/graph.hpp"
#include "plab/lonely_walkers.hpp"
#include "plab/model_io.hpp"
#include "plab/parallel.hpp"
#include "plab/rational.hpp"
#include "plab/reaction_model.hpp"
#include "plab/rng.hpp"
#include "plab/simplex.hpp"
#include "plab/spectral.hpp"
#include "plab/special_models.hpp"
#include "plab/stats.hpp"
#include "plab/walks.hpp"

namespace plab {
inline constexpr const char* kVersion = "0.1.0";
}
