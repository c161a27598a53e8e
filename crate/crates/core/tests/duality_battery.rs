use qidlab::duality::{self, flat_prior, DualityConfig};
use qidlab::metrics::{self, OptimConfig};

fn cfg() -> DualityConfig {
    DualityConfig { optim: OptimConfig::with_seed(17), ..DualityConfig::default() }
}

#[test]
fn fidelity_alternative_holds_on_battery() {
    let cfg = cfg();
    let reports = duality::over_battery(|s, ch| duality::fidelity_alternative_report(s, ch, &cfg, false)).unwrap();
    for r in &reports {
        println!("{:40} delta={:.6} f={:.6} fwd={:.3} conv={:.3}", r.channel_spec, r.delta_hat, r.f_hat, r.bound_forward, r.bound_converse);
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn information_disturbance_holds_on_battery() {
    let cfg = cfg();
    let reports =
        duality::over_battery(|s, ch| duality::info_disturbance_report(s, ch, &flat_prior(ch), &cfg, false)).unwrap();
    for r in &reports {
        println!("{:40} L={:.6} found={:.6} petz={:.4} seesaw={:.4}", r.channel_spec, r.disturbance, r.found, r.petz_fidelity, r.seesaw_fidelity);
        assert!(r.pass, "{r:?}");
        assert!(r.seesaw_monotone, "{r:?}");
    }
}

#[test]
fn forgetfulness_splits_between_outputs() {
    let cfg = cfg();
    let slack = cfg.slack;
    duality::over_battery(|s, ch| {
        let fb = metrics::forgetfulness_deficit(ch, &cfg.optim)?.value;
        let fe = metrics::forgetfulness_deficit(&ch.complement(), &cfg.optim)?.value;
        println!("{s:40} fB={fb:.6} fE={fe:.6}");
        assert!(fb + fe >= 2.0 - slack, "{s}: {fb} + {fe}");
        Ok(())
    })
    .unwrap();
}
