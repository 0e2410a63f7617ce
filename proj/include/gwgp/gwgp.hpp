#pragma once

#include "gwgp/errors.hpp"
#include "gwgp/geometry.hpp"
#include "gwgp/hyper_params.hpp"
#include "gwgp/kernels.hpp"
#include "gwgp/kernel_json.hpp"
#include "gwgp/blr.hpp"
#include "gwgp/gp.hpp"
#include "gwgp/qpso.hpp"
#include "gwgp/strategy.hpp"
#include "gwgp/optimize.hpp"
#include "gwgp/metrics.hpp"
#include "gwgp/synth.hpp"
