#pragma once

#include "kljn/analytic_oracle.hpp"
#include "kljn/attacks.hpp"
#include "kljn/errors.hpp"
#include "kljn/experiment.hpp"
#include "kljn/io.hpp"
#include "kljn/kljn_channel.hpp"
#include "kljn/noise_gen.hpp"
#include "kljn/reference_tables.hpp"
#include "kljn/rng.hpp"
#include "kljn/spectral.hpp"
#include "kljn/stats.hpp"
#include "kljn/types.hpp"
#include "kljn/verify.hpp"
