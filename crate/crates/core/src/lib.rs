/*!
Lipschitz constants for water distribution network models.

A network is read from an EPANET INP file, turned into an indexed
[`model::Network`], and paired with a [`domain::FlowBox`] of attainable link
flows. The nonlinearity `f` stacks pipe head losses, pump head gains and
valve head losses; its Jacobian is diagonal. Three estimators bound the
Lipschitz constant of `f` over the box:

* [`analytical`]: closed-form class constants, exact for the max norm;
* [`bnb`]: certified upper bounds by interval branch and bound;
* [`sampling`]: lower bounds from random, Halton or Sobol points.

```
use wdn_lipschitz::{analytical, domain, inp, model};

let text = "\
[JUNCTIONS]
 J 0 10
[RESERVOIRS]
 R 50
[PIPES]
 P R J 1000 12 100
[CURVES]
 C 0 100
 C 500 80
 C 900 30
[PUMPS]
 M R J HEAD C
";
let net = model::build_network(&inp::parse_inp(text)?);
let omega = domain::FlowBox::new(&net, &[(-500.0, 500.0), (1.0, 900.0)])?;
let k = analytical::k_network(&net, &omega);
assert_eq!(k.value, analytical::osl_network(&net, &omega).value);
# Ok::<(), Box<dyn std::error::Error>>(())
```

The guide in `book/` walks through each piece; its code listings are
compiled and run as doc-tests of this crate.
*/

pub mod analytical;
pub mod bnb;
pub mod domain;
pub mod estimate;
pub mod inp;
pub mod interval;
pub mod model;
pub mod report;
pub mod sampling;

// Book chapters, so `cargo test --doc` runs every listing in the guide.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/descriptor.md")]
    mod descriptor {}
    #[doc = include_str!("../../../book/src/flow-box.md")]
    mod flow_box {}
    #[doc = include_str!("../../../book/src/analytical.md")]
    mod analytical {}
    #[doc = include_str!("../../../book/src/interval.md")]
    mod interval {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
