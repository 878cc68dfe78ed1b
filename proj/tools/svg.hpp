#ifndef MASHSPUD_TOOLS_SVG_HPP
#define MASHSPUD_TOOLS_SVG_HPP

#include "mashspud/mashspud.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace mashspud::tools {

/**
 * @brief Scatter of the first two embedding columns.
 *
 * X points are circles and Y points triangles, coloured by label when available.
 * Anchor points are drawn in black and joined by a grey line.
 */
class ScatterPlot {
public:
    ScatterPlot(int width = 640, int height = 520) : width_{width}, height_{height} {}

    std::string render(const AlignmentResult& result, const AnchorList& anchors, const std::vector<int>* labels_x,
                       const std::vector<int>* labels_y, const std::string& title) const {
        const Matrix& c = result.coords();
        const Eigen::Index n = c.rows();
        Matrix xy = Matrix::Zero(n, 2);
        xy.leftCols(std::min<Eigen::Index>(2, c.cols())) = c.leftCols(std::min<Eigen::Index>(2, c.cols()));

        const double pad = 40.0;
        const Eigen::Vector2d lo = xy.colwise().minCoeff();
        const Eigen::Vector2d hi = xy.colwise().maxCoeff();
        auto sx = [&](double v) { return pad + (hi(0) > lo(0) ? (v - lo(0)) / (hi(0) - lo(0)) : 0.5) * (width_ - 2 * pad); };
        auto sy = [&](double v) { return height_ - pad - (hi(1) > lo(1) ? (v - lo(1)) / (hi(1) - lo(1)) : 0.5) * (height_ - 2 * pad); };

        std::vector<char> anchored(static_cast<std::size_t>(n), 0);
        for (const auto& a : anchors) {
            anchored[static_cast<std::size_t>(a.x)] = 1;
            anchored[static_cast<std::size_t>(result.n_x + a.y)] = 1;
        }

        std::ostringstream out;
        out << std::fixed << std::setprecision(2);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_ << "\" viewBox=\"0 0 "
            << width_ << ' ' << height_ << "\">\n";
        out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out << "<text x=\"" << width_ / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
            << escape(title) << "</text>\n";

        for (const auto& a : anchors) {
            const Eigen::Index j = result.n_x + a.y;
            out << "<line x1=\"" << sx(xy(a.x, 0)) << "\" y1=\"" << sy(xy(a.x, 1)) << "\" x2=\"" << sx(xy(j, 0)) << "\" y2=\""
                << sy(xy(j, 1)) << "\" stroke=\"#999999\" stroke-width=\"0.8\"/>\n";
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const bool is_anchor = anchored[static_cast<std::size_t>(i)] != 0;
                if (is_anchor != (pass == 1)) {
                    continue;
                }
                const bool in_x = i < result.n_x;
                const std::vector<int>* labels = in_x ? labels_x : labels_y;
                const auto row = static_cast<std::size_t>(in_x ? i : i - result.n_x);
                const std::string fill = is_anchor ? "#000000" : colour(labels ? (*labels)[row] : (in_x ? 0 : 1));
                const double px = sx(xy(i, 0));
                const double py = sy(xy(i, 1));
                if (in_x) {
                    out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3.5\" fill=\"" << fill << "\" fill-opacity=\"0.8\"/>\n";
                } else {
                    out << "<polygon points=\"" << px << ',' << py - 4.5 << ' ' << px - 4 << ',' << py + 3 << ' ' << px + 4 << ','
                        << py + 3 << "\" fill=\"" << fill << "\" fill-opacity=\"0.8\"/>\n";
                }
            }
        }
        out << "</svg>\n";
        return out.str();
    }

    void write(const std::string& path, const AlignmentResult& result, const AnchorList& anchors, const std::vector<int>* labels_x,
               const std::vector<int>* labels_y, const std::string& title) const {
        std::ofstream f(path);
        if (!f) {
            throw std::runtime_error("cannot write " + path);
        }
        f << render(result, anchors, labels_x, labels_y, title);
    }

private:
    static std::string colour(int label) {
        static const std::array<const char*, 10> palette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
        return palette[static_cast<std::size_t>(label < 0 ? 0 : label) % palette.size()];
    }

    static std::string escape(const std::string& s) {
        std::string out;
        for (char ch : s) {
            switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += ch;
            }
        }
        return out;
    }

    int width_;
    int height_;
};

} // namespace mashspud::tools

#endif
