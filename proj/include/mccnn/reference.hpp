#pragma once

#include "mccnn/gradients.hpp"
#include "mccnn/model.hpp"

// Plain serial implementations of the kernels, kept as a cross-check for the
// OpenMP paths. Every output slot is computed with the same arithmetic in
// the same order as the parallel kernels, so results must match bit for bit.
namespace mccnn::reference {

std::vector<double> conv_pool(const Matrix& seq, const FilterBank& bank,
                              Activation activation,
                              std::vector<std::size_t>* argmax = nullptr);

std::vector<double> grouped_softmax(const std::vector<double>& v,
                                    std::size_t group_size);

std::vector<double> dense_forward(const std::vector<double>& x, const DenseLayer& layer);

std::vector<double> forward(const MCCNNModel& model, const Matrix& seq);

std::vector<double> ensemble_predict(const Ensemble& ensemble, const Matrix& seq);

LossAndGrads model_gradients(const MCCNNModel& model, const Matrix& seq,
                             std::size_t true_class);

GradientSet finite_difference_gradients(const MCCNNModel& model, const Matrix& seq,
                                        std::size_t true_class, double eps = 1e-5);

}  // namespace mccnn::reference
