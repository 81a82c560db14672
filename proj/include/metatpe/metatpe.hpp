#pragma once

#include "metatpe/benchmarks.hpp"
#include "metatpe/errors.hpp"
#include "metatpe/kde.hpp"
#include "metatpe/mo_ranking.hpp"
#include "metatpe/optimizer.hpp"
#include "metatpe/random.hpp"
#include "metatpe/search_space.hpp"
#include "metatpe/task_similarity.hpp"
