#pragma once

#include "errors.hpp"
#include "word.hpp"
#include "product.hpp"
#include "boundary.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "parallel.hpp"
#include "measure.hpp"
#include "walk.hpp"
#include "radial.hpp"
#include "convolution.hpp"
#include "entropy.hpp"
#include "harmonic.hpp"
#include "doob.hpp"
#include "theory.hpp"
#include "dimension.hpp"
#include "conservation.hpp"
#include "chain.hpp"
#include "schottky.hpp"
#include "pivotal.hpp"
#include "verification.hpp"
#include "acceptance.hpp"
#include "config.hpp"
#include "experiment.hpp"
