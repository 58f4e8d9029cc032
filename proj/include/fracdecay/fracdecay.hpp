#pragma once

// Everything at once.

#include "fracdecay/config.hpp"
#include "fracdecay/erdos.hpp"
#include "fracdecay/error.hpp"
#include "fracdecay/exponent.hpp"
#include "fracdecay/fourier.hpp"
#include "fracdecay/io.hpp"
#include "fracdecay/measure.hpp"
#include "fracdecay/normality.hpp"
#include "fracdecay/parallel.hpp"
#include "fracdecay/phase.hpp"
#include "fracdecay/precise.hpp"
#include "fracdecay/rng.hpp"
#include "fracdecay/verify.hpp"
