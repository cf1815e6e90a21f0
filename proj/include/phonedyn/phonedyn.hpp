#pragma once

#include "acoustic.hpp"
#include "context.hpp"
#include "contours.hpp"
#include "dataset.hpp"
#include "decoding.hpp"
#include "error.hpp"
#include "npy.hpp"
#include "parallel.hpp"
#include "preprocess.hpp"
#include "projector.hpp"
#include "ridge.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "synth.hpp"
#include "text.hpp"
#include "vocab.hpp"
#include "results.hpp"
#include "svg.hpp"
