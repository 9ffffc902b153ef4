import init, { desk_spec, solve, alpha_sweep, two_bus } from "./pkg/trilayer_wasm.js";

const $ = (id) => document.getElementById(id);

// let the status text paint before a blocking solve
const later = (f) => new Promise((ok) => setTimeout(() => ok(f()), 20));

function drawChart(canvas, xs, series) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 48;
  ctx.clearRect(0, 0, w, h);
  const vals = series.flatMap((s) => s.ys).filter((v) => v != null);
  if (!vals.length) return;
  const ymin = Math.min(0, ...vals), ymax = Math.max(...vals);
  const xmin = xs[0], xmax = xs[xs.length - 1];
  const sx = (x) => pad + ((x - xmin) / (xmax - xmin || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad + ((ymin - y) / (ymax - ymin || 1)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.beginPath();
  ctx.moveTo(pad, pad / 2);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.stroke();
  ctx.fillText(ymax.toFixed(0), 4, sy(ymax) + 4);
  ctx.fillText(ymin.toFixed(0), 4, sy(ymin) + 4);
  ctx.fillText(xmin.toString(), sx(xmin) - 8, h - pad + 16);
  ctx.fillText(xmax.toString(), sx(xmax) - 8, h - pad + 16);
  ctx.fillText("offset", w / 2 - 16, h - 12);
  series.forEach((s, i) => {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    ctx.beginPath();
    let open = false;
    xs.forEach((x, k) => {
      const y = s.ys[k];
      if (y == null) { open = false; return; }
      if (open) ctx.lineTo(sx(x), sy(y)); else ctx.moveTo(sx(x), sy(y));
      open = true;
    });
    ctx.stroke();
    xs.forEach((x, k) => {
      if (s.ys[k] != null) ctx.fillRect(sx(x) - 2, sy(s.ys[k]) - 2, 4, 4);
    });
    ctx.fillText(s.label, w - pad - 110, pad / 2 + 14 * (i + 1));
  });
}

async function main() {
  await init();
  const spec = desk_spec();

  $("solve").onclick = async () => {
    $("solve-status").textContent = "solving…";
    $("solve-status").className = "busy";
    try {
      const r = await later(() => JSON.parse(solve(spec, Number($("seed").value), $("variant").value)));
      $("report").textContent = r.text;
      $("solve-status").textContent = `${r.status}, ${r.nodes} nodes`;
    } catch (e) {
      $("report").textContent = String(e);
      $("solve-status").textContent = "";
    }
    $("solve-status").className = "";
  };

  $("sweep").onclick = async () => {
    $("sweep-status").textContent = "sweeping…";
    $("sweep-status").className = "busy";
    try {
      const lo = Number($("lo").value), hi = Number($("hi").value), n = Number($("points").value);
      const r = await later(() => JSON.parse(alpha_sweep(spec, Number($("seed").value), lo, hi, n)));
      drawChart($("chart"), r.offset, [
        { label: "LSE profit", ys: r.profit, color: "#1f5fa8" },
        { label: "total welfare", ys: r.welfare, color: "#b5521b" },
      ]);
      $("sweep-status").textContent = `${r.offset.length} points`;
    } catch (e) {
      $("sweep-status").textContent = String(e);
    }
    $("sweep-status").className = "";
  };

  const grid = () => {
    const limit = Number($("limit").value), load = Number($("load").value);
    $("limit-val").textContent = limit;
    $("load-val").textContent = load;
    try {
      const r = JSON.parse(two_bus(limit, load));
      $("g1").textContent = r.dispatch[0].toFixed(1);
      $("g2").textContent = r.dispatch[1].toFixed(1);
      $("p1").textContent = r.lmp[0].toFixed(2);
      $("p2").textContent = r.lmp[1].toFixed(2);
    } catch (e) {
      $("g1").textContent = $("g2").textContent = "–";
      $("p1").textContent = $("p2").textContent = String(e);
    }
  };
  $("limit").oninput = grid;
  $("load").oninput = grid;
  grid();
}

main();
