import init, { simulate, bound_curve, conformal_band } from "./pkg/msaci_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const $ = (id) => document.getElementById(id);

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, 4);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - 4, h - pad);
  ctx.stroke();
}

function scaler(lo, hi, outLo, outHi) {
  const span = hi - lo || 1;
  return (v) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function label(ctx, text, x, y) {
  ctx.fillStyle = "#555";
  ctx.font = "11px system-ui";
  ctx.fillText(text, x, y);
}

function finiteRange(arrays) {
  let lo = Infinity, hi = -Infinity;
  for (const a of arrays) for (const v of a) if (Number.isFinite(v)) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  return [lo, hi];
}

let lastSim = null;

function drawSeries(sim) {
  const c = $("series"), ctx = c.getContext("2d"), pad = 36;
  axes(ctx, c.width, c.height, pad);
  const n = sim.ticks(), h = sim.horizon();
  const actual = sim.actual(), lower = sim.lower(), upper = sim.upper();
  const shown = h === 1 ? [0] : [0, h - 1];
  const [lo, hi] = finiteRange([actual, ...shown.map((i) => lower.slice(i * n, (i + 1) * n)), ...shown.map((i) => upper.slice(i * n, (i + 1) * n))]);
  const x = scaler(0, n - 1, pad, c.width - 6);
  const y = scaler(lo, hi, c.height - pad, 6);
  for (const i of shown.slice().reverse()) {
    ctx.fillStyle = COLORS[i] + "33";
    for (let t = 0; t < n; t++) {
      const l = lower[i * n + t], u = upper[i * n + t];
      if (Number.isNaN(l)) continue;
      const yl = Number.isFinite(l) ? y(l) : c.height - pad;
      const yu = Number.isFinite(u) ? y(u) : 6;
      ctx.fillRect(x(t) - 0.5, Math.min(yl, yu), Math.max(1, x(t + 1) - x(t)), Math.abs(yl - yu));
    }
  }
  ctx.strokeStyle = "#000";
  ctx.beginPath();
  actual.forEach((v, t) => (t ? ctx.lineTo(x(t), y(v)) : ctx.moveTo(x(t), y(v))));
  ctx.stroke();
  label(ctx, hi.toFixed(2), 2, 12);
  label(ctx, lo.toFixed(2), 2, c.height - pad);
  label(ctx, "tick", c.width - 30, c.height - 8);
  $("legend").innerHTML = shown
    .map((i) => `<span style="color:${COLORS[i]}">■ step ${i + 1} interval</span>`)
    .join("") + "<span>black line: observed</span>";
}

function drawControl(sim) {
  const c = $("control"), ctx = c.getContext("2d"), pad = 36;
  axes(ctx, c.width, c.height, pad);
  const n = sim.ticks(), h = sim.horizon(), eps = sim.eps();
  const [lo, hi] = finiteRange([eps]);
  const x = scaler(0, n - 1, pad, c.width - 6);
  const y = scaler(lo, hi, c.height - pad, 6);
  for (let i = 0; i < h; i++) {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    for (let t = 0; t < n; t++) {
      const v = eps[i * n + t];
      t ? ctx.lineTo(x(t), y(v)) : ctx.moveTo(x(t), y(v));
    }
    ctx.stroke();
  }
  label(ctx, hi.toFixed(3), 2, 12);
  label(ctx, lo.toFixed(3), 2, c.height - pad);
  label(ctx, "control input εₜ per step", pad + 6, 14);
}

function drawStats(sim, target) {
  const rates = sim.error_rates(), widths = sim.mean_widths();
  let html = "<tr><th>step</th>" + Array.from(rates, (_, i) => `<th>${i + 1}</th>`).join("") + "</tr>";
  html += "<tr><td>target</td>" + Array.from(rates, () => `<td>${target}</td>`).join("") + "</tr>";
  html += "<tr><td>error rate</td>" + Array.from(rates).map((r) => `<td>${r.toFixed(3)}</td>`).join("") + "</tr>";
  html += "<tr><td>mean width</td>" + Array.from(widths).map((w) => `<td>${w.toFixed(3)}</td>`).join("") + "</tr>";
  $("stats").innerHTML = html;
}

function drawBound(sim, eps, gamma) {
  const c = $("bound"), ctx = c.getContext("2d"), pad = 36;
  axes(ctx, c.width, c.height, pad);
  const n = sim.ticks(), h = sim.horizon(), dev = sim.deviation();
  const curve = bound_curve(eps, gamma, n);
  const logs = (v) => Math.log10(Math.max(v, 1e-5));
  const x = scaler(0, n - 1, pad, c.width - 6);
  const y = scaler(-5, Math.max(1, logs(curve[0])), c.height - pad, 6);
  ctx.strokeStyle = "#000";
  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  curve.forEach((v, t) => (t ? ctx.lineTo(x(t), y(logs(v))) : ctx.moveTo(x(t), y(logs(v)))));
  ctx.stroke();
  ctx.setLineDash([]);
  for (let i = 0; i < h; i++) {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    let started = false;
    for (let t = 0; t < n; t++) {
      const v = dev[i * n + t];
      if (Number.isNaN(v)) continue;
      // The step's trial count trails the tick by i.
      const tt = t - i;
      started ? ctx.lineTo(x(tt), y(logs(v))) : ctx.moveTo(x(tt), y(logs(v)));
      started = true;
    }
    ctx.stroke();
  }
  label(ctx, "1e-5", 2, c.height - pad);
  label(ctx, "dashed: bound", pad + 6, 14);
}

function runSim() {
  const eps = parseFloat($("eps").value), gamma = parseFloat($("gamma").value);
  $("sim-msg").textContent = "";
  try {
    const sim = simulate($("gen").value, parseInt($("steps").value), parseInt($("seed").value),
      parseInt($("h").value), eps, gamma);
    lastSim?.free();
    lastSim = sim;
    drawSeries(sim);
    drawControl(sim);
    drawStats(sim, eps);
    drawBound(sim, eps, gamma);
    if (sim.clamps() > 0) $("sim-msg").textContent = `clamped ${sim.clamps()} times`;
  } catch (e) {
    $("sim-msg").textContent = String(e);
  }
}

// Band demo state, in data coordinates x ∈ [0, 10], y ∈ [-2, 12].
const X_RANGE = [0, 10], Y_RANGE = [-2, 12];
let points = [];

function seedPoints() {
  points = [];
  let s = 7;
  const rnd = () => ((s = (s * 16807) % 2147483647) / 2147483647);
  for (let k = 0; k < 25; k++) {
    const px = 0.5 + 9 * rnd();
    points.push([px, 1 + 0.8 * px + 2 * (rnd() - 0.5)]);
  }
}

function drawBand() {
  const c = $("band"), ctx = c.getContext("2d"), pad = 30;
  axes(ctx, c.width, c.height, pad);
  const eps = parseFloat($("band-eps").value), a = Math.pow(10, parseFloat($("band-a").value));
  $("band-eps-v").textContent = eps.toFixed(2);
  $("band-a-v").textContent = a.toPrecision(2);
  const x = scaler(X_RANGE[0], X_RANGE[1], pad, c.width - 6);
  const y = scaler(Y_RANGE[0], Y_RANGE[1], c.height - pad, 6);
  $("band-msg").textContent = "";
  if (points.length >= 2) {
    try {
      const band = conformal_band(points.map((p) => p[0]), points.map((p) => p[1]), eps, a, X_RANGE[0], X_RANGE[1], 200);
      ctx.fillStyle = "#1f77b433";
      ctx.beginPath();
      for (let k = 0; k < band.length; k += 3) {
        const u = Number.isFinite(band[k + 2]) ? y(band[k + 2]) : 6;
        k ? ctx.lineTo(x(band[k]), u) : ctx.moveTo(x(band[k]), u);
      }
      for (let k = band.length - 3; k >= 0; k -= 3) {
        const l = Number.isFinite(band[k + 1]) ? y(band[k + 1]) : c.height - pad;
        ctx.lineTo(x(band[k]), l);
      }
      ctx.fill();
      if (eps < 2 / (points.length + 1)) $("band-msg").textContent = "ε below 2/n: the band is unbounded";
    } catch (e) {
      $("band-msg").textContent = String(e);
    }
  }
  ctx.fillStyle = "#000";
  for (const [px, py] of points) {
    ctx.beginPath();
    ctx.arc(x(px), y(py), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function bandClick(ev) {
  const c = $("band"), pad = 30, r = c.getBoundingClientRect();
  const cx = ((ev.clientX - r.left) * c.width) / r.width, cy = ((ev.clientY - r.top) * c.height) / r.height;
  const px = scaler(pad, c.width - 6, X_RANGE[0], X_RANGE[1])(cx);
  const py = scaler(c.height - pad, 6, Y_RANGE[0], Y_RANGE[1])(cy);
  if (ev.shiftKey && points.length) {
    let best = 0;
    points.forEach((p, k) => {
      if (Math.hypot(p[0] - px, p[1] - py) < Math.hypot(points[best][0] - px, points[best][1] - py)) best = k;
    });
    points.splice(best, 1);
  } else {
    points.push([px, py]);
  }
  drawBand();
}

await init();
$("run").addEventListener("click", runSim);
$("band").addEventListener("click", bandClick);
$("band-eps").addEventListener("input", drawBand);
$("band-a").addEventListener("input", drawBand);
$("band-reset").addEventListener("click", () => { seedPoints(); drawBand(); });
seedPoints();
runSim();
drawBand();
