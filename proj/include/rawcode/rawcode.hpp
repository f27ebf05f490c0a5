#pragma once

// Umbrella header.

#include "rawcode/baselines.hpp"
#include "rawcode/coding.hpp"
#include "rawcode/coincidence.hpp"
#include "rawcode/diagnostics.hpp"
#include "rawcode/interval_map.hpp"
#include "rawcode/interval_set.hpp"
#include "rawcode/io.hpp"
#include "rawcode/parallel.hpp"
#include "rawcode/partition.hpp"
#include "rawcode/rational.hpp"
#include "rawcode/rng.hpp"
#include "rawcode/trajectory.hpp"
#include "rawcode/version.hpp"
