#ifndef SGM_SGM_HPP
#define SGM_SGM_HPP

#include "sgm/clustering.hpp"
#include "sgm/dense.hpp"
#include "sgm/eksm.hpp"
#include "sgm/errors.hpp"
#include "sgm/ipm.hpp"
#include "sgm/kmeans.hpp"
#include "sgm/neighbors.hpp"
#include "sgm/parallel.hpp"
#include "sgm/pcg.hpp"
#include "sgm/rng.hpp"
#include "sgm/sbm.hpp"
#include "sgm/signed_graph.hpp"
#include "sgm/sparse.hpp"
#include "sgm/vector_ops.hpp"

#endif // SGM_SGM_HPP
