#pragma once

#include "tap/attention.hpp"
#include "tap/grad.hpp"
#include "tap/io.hpp"
#include "tap/metrics.hpp"
#include "tap/model.hpp"
#include "tap/observation.hpp"
#include "tap/patch.hpp"
#include "tap/rng.hpp"
#include "tap/synth.hpp"
#include "tap/tensor.hpp"
#include "tap/tensorize.hpp"
#include "tap/theory.hpp"
#include "tap/trainer.hpp"
#include "tap/tucker_als.hpp"
