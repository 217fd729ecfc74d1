#pragma once

// Umbrella header: context-gated product-of-experts intent inference.

#include "ctxpoe/analysis.hpp"
#include "ctxpoe/domain.hpp"
#include "ctxpoe/errors.hpp"
#include "ctxpoe/eval.hpp"
#include "ctxpoe/experts.hpp"
#include "ctxpoe/fusion.hpp"
#include "ctxpoe/io.hpp"
#include "ctxpoe/numeric.hpp"
#include "ctxpoe/report.hpp"
#include "ctxpoe/rng.hpp"
#include "ctxpoe/svg.hpp"
#include "ctxpoe/synthgen.hpp"
#include "ctxpoe/version.hpp"
