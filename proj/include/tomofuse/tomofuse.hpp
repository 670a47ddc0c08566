#pragma once

#include "tomofuse/ablate.hpp"
#include "tomofuse/config.hpp"
#include "tomofuse/error.hpp"
#include "tomofuse/featpool.hpp"
#include "tomofuse/fusion.hpp"
#include "tomofuse/kv.hpp"
#include "tomofuse/learner/adam.hpp"
#include "tomofuse/learner/augment.hpp"
#include "tomofuse/learner/checkpoint.hpp"
#include "tomofuse/learner/head.hpp"
#include "tomofuse/learner/loss.hpp"
#include "tomofuse/learner/pipeline.hpp"
#include "tomofuse/learner/sampler.hpp"
#include "tomofuse/learner/train.hpp"
#include "tomofuse/manifest.hpp"
#include "tomofuse/report.hpp"
#include "tomofuse/roc.hpp"
#include "tomofuse/synth.hpp"
#include "tomofuse/tensor.hpp"
#include "tomofuse/tensor_io.hpp"
#include "tomofuse/volume.hpp"
