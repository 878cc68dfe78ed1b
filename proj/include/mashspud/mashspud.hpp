#ifndef MASHSPUD_MASHSPUD_HPP
#define MASHSPUD_MASHSPUD_HPP

#include "adaptations.hpp"
#include "alignment.hpp"
#include "baselines.hpp"
#include "data.hpp"
#include "embed.hpp"
#include "graph.hpp"
#include "mash.hpp"
#include "metrics.hpp"
#include "spud.hpp"

#endif
