#pragma once

// Umbrella header for the whole library. Individual headers are also safe to
// include on their own; json_io.hpp is left out because it depends on the
// vendored nlohmann/json header.

#include "fairml/csv.hpp"
#include "fairml/cutoff.hpp"
#include "fairml/dataset.hpp"
#include "fairml/ingest.hpp"
#include "fairml/metrics.hpp"
#include "fairml/objectives.hpp"
#include "fairml/pipeline.hpp"
#include "fairml/resample.hpp"
#include "fairml/rng.hpp"
#include "fairml/simulate.hpp"
#include "fairml/solver.hpp"
#include "fairml/synth.hpp"
