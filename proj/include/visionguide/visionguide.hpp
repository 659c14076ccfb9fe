#pragma once

// Umbrella header: coarse-to-fine Artcode localisation.

#include "visionguide/annotation.hpp"
#include "visionguide/classification.hpp"
#include "visionguide/classifier.hpp"
#include "visionguide/dataset.hpp"
#include "visionguide/error.hpp"
#include "visionguide/eval.hpp"
#include "visionguide/features.hpp"
#include "visionguide/forest.hpp"
#include "visionguide/heatmap.hpp"
#include "visionguide/image.hpp"
#include "visionguide/image_io.hpp"
#include "visionguide/imaging.hpp"
#include "visionguide/parallel.hpp"
#include "visionguide/peaks.hpp"
#include "visionguide/pipeline.hpp"
#include "visionguide/random.hpp"
