import init, { successProbabilityCurves, observableCurves, monteCarloCurves } from "./pkg/su3g_web.js";

const LATTICES = {
  "open chain, 2 sites": ["chain-open", [2]],
  "open chain, 4 sites": ["chain-open", [4]],
  "ring, 4 sites": ["chain-periodic", [4]],
  "2x2 square": ["square-periodic", [2, 2]],
};
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

function plot(canvas, legend, xs, series, { xlabel, errors } = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = { l: 55, r: 15, t: 10, b: 35 };
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s, i) => s.ys.map((y, j) => [y - (errors?.[i]?.[j] ?? 0), y + (errors?.[i]?.[j] ?? 0)]).flat());
  let [lo, hi] = [Math.min(...all), Math.max(...all)];
  if (hi - lo < 1e-9) { lo -= 1; hi += 1; }
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const X = (x) => pad.l + ((x - x0) / (x1 - x0)) * (w - pad.l - pad.r);
  const Y = (y) => h - pad.b - ((y - lo) / (hi - lo)) * (h - pad.t - pad.b);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
  for (let k = 0; k <= 4; k++) {
    const y = lo + (k / 4) * (hi - lo);
    ctx.fillText(y.toFixed(2), 5, Y(y) + 4);
    const x = x0 + (k / 4) * (x1 - x0);
    ctx.fillText(x.toFixed(2), X(x) - 12, h - pad.b + 15);
  }
  ctx.fillText(xlabel ?? "g", w / 2, h - 5);

  series.forEach((s, i) => {
    ctx.strokeStyle = ctx.fillStyle = s.color ?? COLORS[i % COLORS.length];
    ctx.setLineDash(s.dashed ? [5, 4] : []);
    if (s.points) {
      s.ys.forEach((y, j) => {
        ctx.beginPath();
        ctx.arc(X(xs[j]), Y(y), 3, 0, 2 * Math.PI);
        ctx.fill();
        const e = errors?.[i]?.[j];
        if (e) {
          ctx.beginPath();
          ctx.moveTo(X(xs[j]), Y(y - e));
          ctx.lineTo(X(xs[j]), Y(y + e));
          ctx.stroke();
        }
      });
    } else {
      ctx.beginPath();
      s.ys.forEach((y, j) => (j ? ctx.lineTo(X(xs[j]), Y(y)) : ctx.moveTo(X(xs[j]), Y(y))));
      ctx.stroke();
    }
  });
  ctx.setLineDash([]);
  legend.innerHTML = series
    .map((s, i) => `<span style="color:${s.color ?? COLORS[i % COLORS.length]}">${s.dashed ? "- -" : s.points ? "&#9679;" : "&#8212;"} ${s.name}</span>`)
    .join("");
}

function column(flat, stride, k) {
  const out = [];
  for (let i = k; i < flat.length; i += stride) out.push(flat[i]);
  return out;
}

function wire(id, run) {
  const box = document.getElementById(id);
  const select = box.querySelector("select");
  if (select) for (const name of Object.keys(LATTICES)) select.add(new Option(name));
  const value = (n) => Number(box.querySelector(`[name=${n}]`).value);
  const status = box.querySelector(".status");
  const go = () => {
    status.textContent = "";
    try {
      run({ value, lattice: select && LATTICES[select.value], canvas: box.querySelector("canvas"), legend: box.querySelector(".legend") });
    } catch (e) {
      status.textContent = String(e.message ?? e);
    }
  };
  box.querySelector("button").addEventListener("click", go);
  go();
}

await init();

wire("p0", ({ value, lattice, canvas, legend }) => {
  const [geometry, dims] = lattice;
  const d = successProbabilityCurves(geometry, Uint32Array.from(dims), value("delta"), value("gmin"), 0, 81);
  const g = column(d, 3, 0);
  plot(canvas, legend, g, [
    { name: "p0, Fermi sea", ys: column(d, 3, 1) },
    { name: "p0, BCS", ys: column(d, 3, 2), dashed: true },
  ]);
});

wire("obs", ({ value, lattice, canvas, legend }) => {
  const [geometry, dims] = lattice;
  const d = observableCurves(geometry, Uint32Array.from(dims), value("u"), value("gmin"), 0, 81);
  const g = column(d, 5, 0);
  plot(canvas, legend, g, [
    { name: "<K>", ys: column(d, 5, 1) },
    { name: "U<D>", ys: column(d, 5, 2) },
    { name: "<H>", ys: column(d, 5, 3) },
    { name: "<P3>/site", ys: column(d, 5, 4) },
  ]);
});

wire("mc", ({ value, canvas, legend }) => {
  const d = monteCarloCurves(value("u"), -3, -0.25, 12, value("sweeps"), value("seed"));
  const g = column(d, 13, 0);
  const names = ["<K>", "U<D>"];
  const series = [], errors = [];
  names.forEach((name, k) => {
    series.push({ name: `${name} MC`, ys: column(d, 13, 1 + 3 * k), points: true, color: COLORS[k] });
    errors.push(column(d, 13, 2 + 3 * k));
    series.push({ name: `${name} exact`, ys: column(d, 13, 3 + 3 * k), color: COLORS[k] });
    errors.push(null);
  });
  plot(canvas, legend, g, series, { errors });
});
