import init, { decay_curves, gadget_probabilities, cost_curves } from "./pkg/lindsim_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Minimal line plot: series = [{ys, color, band?}], shared xs.
function plot(canvas, xs, series, { logY = false } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 40;
  ctx.clearRect(0, 0, W, H);
  const f = logY ? Math.log10 : (v) => v;
  const all = series.flatMap((s) => s.ys.map(f));
  const lo = Math.min(...all), hi = Math.max(...all);
  const span = hi - lo || 1;
  const x = (v) => pad + ((v - xs[0]) / (xs[xs.length - 1] - xs[0] || 1)) * (W - 2 * pad);
  const y = (v) => H - pad - ((f(v) - lo) / span) * (H - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText((logY ? "1e" : "") + hi.toPrecision(3), 2, pad + 4);
  ctx.fillText((logY ? "1e" : "") + lo.toPrecision(3), 2, H - pad);
  ctx.fillText(String(xs[0]), pad, H - pad + 14);
  ctx.fillText(String(xs[xs.length - 1]), W - pad - 10, H - pad + 14);

  for (const s of series) {
    if (s.band) {
      ctx.fillStyle = s.color + "33";
      ctx.beginPath();
      xs.forEach((v, i) => ctx.lineTo(x(v), y(s.ys[i] + s.band[i])));
      [...xs].reverse().forEach((v, j) => {
        const i = xs.length - 1 - j;
        ctx.lineTo(x(v), y(s.ys[i] - s.band[i]));
      });
      ctx.fill();
    }
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    xs.forEach((v, i) => (i ? ctx.lineTo(x(v), y(s.ys[i])) : ctx.moveTo(x(v), y(s.ys[i]))));
    ctx.stroke();
  }
}

function guard(msgEl, fn) {
  try {
    msgEl.textContent = "";
    msgEl.className = "";
    fn();
  } catch (e) {
    msgEl.textContent = String(e.message ?? e);
    msgEl.className = "err";
  }
}

function runDecay() {
  guard($("d-msg"), () => {
    const t0 = performance.now();
    const d = JSON.parse(
      decay_curves(num("d-gamma"), num("d-hz"), num("d-tmax"), 41, num("d-eps"), num("d-ntraj"), num("d-seed")),
    );
    plot($("d-plot"), d.t, [
      { ys: d.exact, color: "#000000" },
      { ys: d.channel, color: "#cc3333" },
      { ys: d.montecarlo, color: "#3366cc", band: d.montecarlo_stderr },
    ]);
    const worst = Math.max(...d.channel.map((v, i) => Math.abs(v - d.exact[i])));
    $("d-msg").textContent = `excited population; max |channel − exact| = ${worst.toExponential(2)}; ${(performance.now() - t0).toFixed(0)} ms`;
  });
}

function runGadget() {
  $("g-rv").textContent = $("g-r").value;
  guard($("g-out"), () => {
    const g = JSON.parse(gadget_probabilities(num("d-gamma"), num("d-hz"), num("g-r")));
    const rows = g.channels.map((c) => `<tr><td>${c.channel}</td><td>${c.weight.toFixed(4)}</td></tr>`).join("");
    $("g-out").innerHTML = `
      <p>λδ = 1/(2·${g.r}): gadget success p = ${g.p.toFixed(4)}, segment p<sup>r</sup> = ${g.p_segment.toFixed(4)} (must exceed 1/4)</p>
      <p>trivial-branch probability p<sub>I</sub> = ${g.p_trivial.toFixed(4)} vs floor 1 − 3/(2r) = ${g.p_trivial_floor.toFixed(4)};
         cutoff for ε = 0.1: h = ${g.default_cutoff}</p>
      <table><tr><th>channel</th><th>mixture weight</th></tr>${rows}</table>`;
  });
}

function runCost() {
  guard($("c-msg"), () => {
    const c = JSON.parse(cost_curves(num("c-nmax"), num("c-t"), num("c-eps")));
    plot(
      $("c-plot"),
      c.n,
      [
        { ys: c.alg1, color: "#cc3333" },
        { ys: c.alg2, color: "#3366cc" },
        { ys: c.lcu_envelope, color: "#999999" },
      ],
      { logY: true },
    );
    const last = c.n.length - 1;
    $("c-msg").textContent = `n = ${c.n[last]}: ${c.alg1[last]} vs ${c.alg2[last]} gates, envelope ${c.lcu_envelope[last].toExponential(2)}`;
  });
}

await init();
$("d-run").onclick = runDecay;
$("g-r").oninput = runGadget;
$("c-run").onclick = runCost;
runDecay();
runGadget();
runCost();
