#pragma once

// Umbrella header: adversarial-input detection via Fisher-information
// surrogates on a small built-in network engine.

#include "fisherdet/attack.hpp"
#include "fisherdet/checksum.hpp"
#include "fisherdet/csv.hpp"
#include "fisherdet/dataset.hpp"
#include "fisherdet/errors.hpp"
#include "fisherdet/eval.hpp"
#include "fisherdet/heatmap.hpp"
#include "fisherdet/idx.hpp"
#include "fisherdet/layers.hpp"
#include "fisherdet/manifest.hpp"
#include "fisherdet/model_io.hpp"
#include "fisherdet/network.hpp"
#include "fisherdet/oracle.hpp"
#include "fisherdet/rng.hpp"
#include "fisherdet/scores.hpp"
#include "fisherdet/tensor.hpp"
#include "fisherdet/train.hpp"
