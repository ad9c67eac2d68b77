#pragma once

#include "riffle/approx.hpp"
#include "riffle/bigint.hpp"
#include "riffle/deck.hpp"
#include "riffle/descent_poly.hpp"
#include "riffle/error.hpp"
#include "riffle/explore.hpp"
#include "riffle/hardness.hpp"
#include "riffle/histogram_cache.hpp"
#include "riffle/parallel.hpp"
#include "riffle/report.hpp"
#include "riffle/rng.hpp"
#include "riffle/scenario.hpp"
#include "riffle/shuffle.hpp"
#include "riffle/tvd.hpp"
