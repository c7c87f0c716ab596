#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "sql2text/trainer.hpp"

namespace sql2text {

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& log) {
  out << "epoch,train_loss,dev_bleu,grad_norm_mean\n";
  out << std::setprecision(10);
  for (const auto& m : log) {
    out << m.epoch << ',' << m.train_loss << ',';
    if (m.dev_bleu) out << *m.dev_bleu;
    out << ',' << m.grad_norm_mean << '\n';
  }
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open metrics file " + path);
  write_metrics_csv(out, log);
}

}  // namespace sql2text
