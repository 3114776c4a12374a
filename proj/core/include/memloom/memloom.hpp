#pragma once

// Umbrella header: the whole public surface in one include.

#include "memloom/backends.hpp"
#include "memloom/decoding.hpp"
#include "memloom/errors.hpp"
#include "memloom/memory_log.hpp"
#include "memloom/metrics.hpp"
#include "memloom/mocks.hpp"
#include "memloom/pipeline.hpp"
#include "memloom/segmentation.hpp"
#include "memloom/synth.hpp"
#include "memloom/util.hpp"
