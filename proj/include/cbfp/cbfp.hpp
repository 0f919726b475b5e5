#pragma once

#include "cbfp/error.hpp"
#include "cbfp/ieee_fields.hpp"
#include "cbfp/codec.hpp"
#include "cbfp/block_file.hpp"
#include "cbfp/alu.hpp"
#include "cbfp/metrics.hpp"
#include "cbfp/qam.hpp"
#include "cbfp/rates.hpp"
#include "cbfp/config.hpp"
#include "cbfp/experiments.hpp"
