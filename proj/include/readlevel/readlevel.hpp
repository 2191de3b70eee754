#pragma once

// Umbrella header for the readability-level toolkit.

#include "readlevel/aggregate.hpp"
#include "readlevel/class_weights.hpp"
#include "readlevel/collapse.hpp"
#include "readlevel/decode.hpp"
#include "readlevel/errors.hpp"
#include "readlevel/fusion.hpp"
#include "readlevel/io.hpp"
#include "readlevel/levels.hpp"
#include "readlevel/linear_heads.hpp"
#include "readlevel/manifest.hpp"
#include "readlevel/metrics.hpp"
#include "readlevel/scaling.hpp"
#include "readlevel/synthetic.hpp"
#include "readlevel/text.hpp"
#include "readlevel/train.hpp"
