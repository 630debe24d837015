use std::fmt::Write;

use super::NetworkDescription;

/// Writes a description back out as INP text.
///
/// Only raw file fields are written (lengths, roughness, curve points, ...);
/// derived values such as resistances are recomputed on reading, so
/// `parse_inp(&write_inp(&d)) == Ok(d)`. Numbers use Rust's shortest
/// round-trip formatting.
pub fn write_inp(desc: &NetworkDescription) -> String {
    let mut out = String::new();
    // writing to a String cannot fail
    let w = &mut out;

    let _ = writeln!(w, "[JUNCTIONS]\n;ID\tElev\tDemand");
    for j in &desc.junctions {
        let _ = writeln!(w, " {}\t{}\t{}", j.id, j.elevation, j.base_demand);
    }

    let _ = writeln!(w, "\n[RESERVOIRS]\n;ID\tHead");
    for r in &desc.reservoirs {
        let _ = writeln!(w, " {}\t{}", r.id, r.head);
    }

    let _ = writeln!(
        w,
        "\n[TANKS]\n;ID\tElev\tInitLevel\tMinLevel\tMaxLevel\tDiameter\tMinVol"
    );
    for t in &desc.tanks {
        let _ = writeln!(
            w,
            " {}\t{}\t{}\t{}\t{}\t{}\t{}",
            t.id, t.elevation, t.init_level, t.min_level, t.max_level, t.diameter, t.min_volume
        );
    }

    let _ = writeln!(
        w,
        "\n[PIPES]\n;ID\tNode1\tNode2\tLength\tDiameter\tRoughness\tMinorLoss\tStatus"
    );
    for p in &desc.pipes {
        let _ = writeln!(
            w,
            " {}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.id,
            p.from_node,
            p.to_node,
            p.length,
            p.diameter,
            p.roughness,
            p.minor_loss,
            p.status.token()
        );
    }

    let _ = writeln!(w, "\n[PUMPS]\n;ID\tNode1\tNode2\tParameters");
    for p in &desc.pumps {
        let _ = writeln!(
            w,
            " {}\t{}\t{}\tHEAD {}\tSPEED {}",
            p.id, p.from_node, p.to_node, p.curve, p.speed
        );
    }

    let _ = writeln!(
        w,
        "\n[VALVES]\n;ID\tNode1\tNode2\tDiameter\tType\tSetting\tMinorLoss\tOpenness"
    );
    for v in &desc.valves {
        let _ = writeln!(
            w,
            " {}\t{}\t{}\t{}\tGPV\t{}\t{}\t{}",
            v.id, v.from_node, v.to_node, v.diameter, v.curve, v.minor_loss, v.openness
        );
    }

    let _ = writeln!(w, "\n[CURVES]\n;ID\tX\tY");
    for c in &desc.curves {
        for (x, y) in &c.points {
            let _ = writeln!(w, " {}\t{}\t{}", c.id, x, y);
        }
    }

    let _ = writeln!(
        w,
        "\n[OPTIONS]\n Units\t{}\n Headloss\t{}",
        desc.options.flow_units.token(),
        desc.options.headloss.token()
    );

    let _ = writeln!(w, "\n[COORDINATES]\n;Node\tX\tY");
    for c in &desc.coordinates {
        let _ = writeln!(w, " {}\t{}\t{}", c.node, c.x, c.y);
    }

    let _ = writeln!(w, "\n[END]");
    out
}
