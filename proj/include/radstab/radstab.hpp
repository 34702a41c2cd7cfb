#pragma once

#include "radstab/csv.hpp"
#include "radstab/discretize.hpp"
#include "radstab/ensemble.hpp"
#include "radstab/ensemble_io.hpp"
#include "radstab/errors.hpp"
#include "radstab/extract.hpp"
#include "radstab/feature_table.hpp"
#include "radstab/first_order.hpp"
#include "radstab/glcm.hpp"
#include "radstab/glrlm.hpp"
#include "radstab/glszm.hpp"
#include "radstab/icc.hpp"
#include "radstab/morphology.hpp"
#include "radstab/neighborhood.hpp"
#include "radstab/ngtdm.hpp"
#include "radstab/nrrd.hpp"
#include "radstab/parallel.hpp"
#include "radstab/phantom.hpp"
#include "radstab/pipeline.hpp"
#include "radstab/resample.hpp"
#include "radstab/rng.hpp"
#include "radstab/shape_features.hpp"
#include "radstab/survival.hpp"
#include "radstab/version.hpp"
#include "radstab/volume.hpp"
#include "radstab/wavelet.hpp"
