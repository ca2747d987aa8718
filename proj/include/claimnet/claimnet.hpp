#pragma once

#include "claimnet/birank.hpp"
#include "claimnet/cross_validation.hpp"
#include "claimnet/csv.hpp"
#include "claimnet/dataset.hpp"
#include "claimnet/date.hpp"
#include "claimnet/error.hpp"
#include "claimnet/features.hpp"
#include "claimnet/graph.hpp"
#include "claimnet/graph_io.hpp"
#include "claimnet/labels.hpp"
#include "claimnet/logistic.hpp"
#include "claimnet/metrics.hpp"
#include "claimnet/motifs.hpp"
#include "claimnet/pipeline.hpp"
#include "claimnet/random.hpp"
#include "claimnet/stats.hpp"
#include "claimnet/synth.hpp"
#include "claimnet/version.hpp"
