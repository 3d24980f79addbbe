#pragma once

// Everything except the command line front end (cli.hpp).

#include "hashseg/baselines.hpp"
#include "hashseg/candidate_gen.hpp"
#include "hashseg/data_io.hpp"
#include "hashseg/eval.hpp"
#include "hashseg/features.hpp"
#include "hashseg/inference.hpp"
#include "hashseg/mlp.hpp"
#include "hashseg/ngram_lm.hpp"
#include "hashseg/ranker.hpp"
#include "hashseg/segmentation.hpp"
#include "hashseg/supervision.hpp"
#include "hashseg/text.hpp"
