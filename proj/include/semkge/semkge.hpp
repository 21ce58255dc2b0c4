#pragma once
// Umbrella header.

#include "semkge/config.hpp"
#include "semkge/error.hpp"
#include "semkge/eval.hpp"
#include "semkge/io.hpp"
#include "semkge/manifest.hpp"
#include "semkge/models.hpp"
#include "semkge/ontology.hpp"
#include "semkge/partition.hpp"
#include "semkge/rng.hpp"
#include "semkge/sha256.hpp"
#include "semkge/subgraph.hpp"
#include "semkge/trainer.hpp"
#include "semkge/triple_store.hpp"
