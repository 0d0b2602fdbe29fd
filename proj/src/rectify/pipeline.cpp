#include <arrowscore/rectify.hpp>

namespace arrowscore::rectify {

RectifyResult rectify_photo(const RgbImage& image, const RectifyOptions& options,
                            const TargetFaceSpec& spec) {
    require(!image.empty(), "rectify: empty image");
    const CanonicalFrame canonical(options.canonical_size_px);
    const LabImage lab = rgb_to_lab(image);
    std::vector<BandMask> masks = extract_band_masks(lab, options.thresholds);

    std::vector<BoundaryAttempt> attempts;
    std::vector<EllipseCandidate> candidates;
    for (const BandMask& band : masks) {
        BoundaryAttempt attempt;
        attempt.boundary = band.boundary;
        attempt.foreground = count_foreground(band.mask);
        try {
            EllipseFit fit = fit_boundary_ellipse(band);
            candidates.push_back({band.boundary, fit.ellipse, fit.confidence});
            attempt.fit = std::move(fit);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientData && e.kind() != ErrorKind::FitFailure) throw;
            attempt.error = e.what();
        }
        attempts.push_back(std::move(attempt));
    }

    EllipseSet ellipses = select_nested_ellipses(candidates, spec);
    WarpMap warp = build_radial_warp(ellipses, canonical, spec, options.n_angles);
    RgbImage rectified = rectify_image(image, warp);
    return {std::move(masks), std::move(attempts), std::move(ellipses), std::move(warp),
            std::move(rectified)};
}

}  // namespace arrowscore::rectify
