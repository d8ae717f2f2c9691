//! Hand-emitted SVG of the five parameter-space trajectories, with the unit
//! circle, axes, the shared optimum, and the common start marked. Exactly
//! one polyline per combinator.

use gradmix_core::optimizer::Trajectory;

const SIZE: f64 = 640.0;
const WORLD: f64 = 1.6; // plot covers [-WORLD, WORLD]^2

fn sx(x: f64) -> f64 {
    (x + WORLD) / (2.0 * WORLD) * SIZE
}

fn sy(y: f64) -> f64 {
    SIZE - (y + WORLD) / (2.0 * WORLD) * SIZE
}

pub fn fig3_svg(runs: &[(&str, &str, &Trajectory)]) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
         viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes through the origin
    s.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#cccccc\"/>\n",
        sx(-WORLD),
        sy(0.0),
        sx(WORLD),
        sy(0.0)
    ));
    s.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#cccccc\"/>\n",
        sx(0.0),
        sy(-WORLD),
        sx(0.0),
        sy(WORLD)
    ));

    // the unit circle: the zero set of the steep objective
    s.push_str(&format!(
        "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"{:.1}\" fill=\"none\" stroke=\"#999999\" \
         stroke-dasharray=\"6,4\"/>\n",
        sx(0.0),
        sy(0.0),
        SIZE / (2.0 * WORLD)
    ));

    for (name, color, trajectory) in runs {
        let points: Vec<String> = trajectory
            .records
            .iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.params[0]), sy(r.params[1])))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\">\
             <title>{name}</title></polyline>\n",
            points.join(" ")
        ));
    }

    // shared optimum and start
    if let Some((_, _, first)) = runs.first() {
        if let Some(start) = first.records.first() {
            s.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"4\" fill=\"black\"/>\n",
                sx(start.params[0]),
                sy(start.params[1])
            ));
            s.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">start</text>\n",
                sx(start.params[0]) + 8.0,
                sy(start.params[1]) + 4.0
            ));
        }
    }
    s.push_str(&format!(
        "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"5\" fill=\"none\" stroke=\"black\" \
         stroke-width=\"2\"/>\n",
        sx(0.0),
        sy(1.0)
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">optimum (0, 1)</text>\n",
        sx(0.0) + 10.0,
        sy(1.0) - 8.0
    ));

    // legend
    for (i, (name, color, trajectory)) in runs.iter().enumerate() {
        let y = 20.0 + 18.0 * i as f64;
        s.push_str(&format!(
            "<rect x=\"12\" y=\"{:.1}\" width=\"14\" height=\"4\" fill=\"{color}\"/>\n",
            y - 4.0
        ));
        let label = match trajectory.converged_at {
            Some(n) => format!("{name} ({n})"),
            None => format!("{name} (no convergence)"),
        };
        s.push_str(&format!(
            "<text x=\"32\" y=\"{y:.1}\" font-size=\"12\">{label}</text>\n"
        ));
    }

    s.push_str("</svg>\n");
    s
}
