// Umbrella header.
#pragma once

#include "corisk/aggregate.hpp"
#include "corisk/artifacts.hpp"
#include "corisk/boosting.hpp"
#include "corisk/calibration.hpp"
#include "corisk/config.hpp"
#include "corisk/csv.hpp"
#include "corisk/data.hpp"
#include "corisk/error.hpp"
#include "corisk/evaluate.hpp"
#include "corisk/io.hpp"
#include "corisk/manifest.hpp"
#include "corisk/pipeline.hpp"
#include "corisk/rng.hpp"
#include "corisk/selection.hpp"
#include "corisk/stats.hpp"
#include "corisk/synth.hpp"
