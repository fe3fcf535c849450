#pragma once

// Umbrella header for the whole library.

#include "vaereg/adam.hpp"
#include "vaereg/baselines.hpp"
#include "vaereg/checkpoint.hpp"
#include "vaereg/cross_validation.hpp"
#include "vaereg/csv.hpp"
#include "vaereg/dataset.hpp"
#include "vaereg/dense.hpp"
#include "vaereg/errors.hpp"
#include "vaereg/gaussian.hpp"
#include "vaereg/grad_check.hpp"
#include "vaereg/interpret.hpp"
#include "vaereg/latent_generator.hpp"
#include "vaereg/metrics.hpp"
#include "vaereg/rng.hpp"
#include "vaereg/synthetic.hpp"
#include "vaereg/tensor.hpp"
#include "vaereg/train.hpp"
#include "vaereg/util.hpp"
#include "vaereg/vae_regressor.hpp"
