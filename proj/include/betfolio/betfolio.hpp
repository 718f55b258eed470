#pragma once

// Umbrella header: betting-market math, Kelly and Sharpe allocation,
// the shared constrained solver, fixtures ingestion and backtesting.

#include "betfolio/backtest.hpp"
#include "betfolio/error.hpp"
#include "betfolio/fixtures.hpp"
#include "betfolio/kelly.hpp"
#include "betfolio/linalg.hpp"
#include "betfolio/market.hpp"
#include "betfolio/sharpe.hpp"
#include "betfolio/solver.hpp"
#include "betfolio/stats.hpp"
