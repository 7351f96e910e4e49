#pragma once

// Umbrella header: the whole library.

#include "racecms/baselines.hpp"
#include "racecms/bytes.hpp"
#include "racecms/core.hpp"
#include "racecms/errors.hpp"
#include "racecms/eval.hpp"
#include "racecms/hashing.hpp"
#include "racecms/ingest.hpp"
#include "racecms/oracle.hpp"
#include "racecms/planner.hpp"
#include "racecms/recovery.hpp"
#include "racecms/rng.hpp"
#include "racecms/sketch.hpp"
