#pragma once

#include "movierec/cache.hpp"
#include "movierec/csv.hpp"
#include "movierec/dataset.hpp"
#include "movierec/errors.hpp"
#include "movierec/evaluation.hpp"
#include "movierec/kmeans.hpp"
#include "movierec/knn.hpp"
#include "movierec/matrix.hpp"
#include "movierec/predictor.hpp"
#include "movierec/recommenders.hpp"
#include "movierec/similarity.hpp"
#include "movierec/svd.hpp"
#include "movierec/tfidf.hpp"
