#pragma once

#include "srl/adam.hpp"
#include "srl/checkpoint.hpp"
#include "srl/commands.hpp"
#include "srl/config.hpp"
#include "srl/conll.hpp"
#include "srl/decomposition.hpp"
#include "srl/embeddings.hpp"
#include "srl/errors.hpp"
#include "srl/evaluation.hpp"
#include "srl/labels.hpp"
#include "srl/model.hpp"
#include "srl/model_config.hpp"
#include "srl/ops.hpp"
#include "srl/pruning.hpp"
#include "srl/rng.hpp"
#include "srl/tape.hpp"
#include "srl/tensor.hpp"
#include "srl/training.hpp"
#include "srl/vocab.hpp"
