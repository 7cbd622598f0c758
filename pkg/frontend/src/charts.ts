/**
 * Tiny canvas strip charts for the telemetry panes; no charting library, one
 * polyline per series with auto-scaled axes and an optional warning band.
 */

export interface Series {
  label: string;
  color: string;
  points: { t: number; value: number }[];
}

export interface ChartOptions {
  warnBelow?: number;        // tint the background when the last value dips below
  fixedMin?: number;
  fixedMax?: number;
}

export function drawChart(ctx: CanvasRenderingContext2D, width: number,
                          height: number, series: Series[],
                          options: ChartOptions = {}): void {
  ctx.clearRect(0, 0, width, height);
  const all = series.flatMap((s) => s.points);
  if (all.length < 2) {
    ctx.fillStyle = "#667";
    ctx.fillText("waiting for telemetry", 8, 16);
    return;
  }
  const t0 = Math.min(...all.map((p) => p.t));
  const t1 = Math.max(...all.map((p) => p.t));
  let lo = options.fixedMin ?? Math.min(0, ...all.map((p) => p.value));
  let hi = options.fixedMax ?? Math.max(0, ...all.map((p) => p.value));
  if (hi - lo < 1e-9) {
    hi += 1;
    lo -= 1;
  }
  const pad = 0.08 * (hi - lo);
  lo -= pad;
  hi += pad;

  const x = (t: number) => ((t - t0) / Math.max(t1 - t0, 1)) * (width - 10) + 5;
  const y = (v: number) => height - ((v - lo) / (hi - lo)) * (height - 10) - 5;

  const latest = series[0]?.points[series[0].points.length - 1];
  if (options.warnBelow !== undefined && latest && latest.value < options.warnBelow) {
    ctx.fillStyle = "rgba(180, 60, 40, 0.25)";
    ctx.fillRect(0, 0, width, height);
  }

  if (lo < 0 && hi > 0) {
    ctx.strokeStyle = "#445";
    ctx.beginPath();
    ctx.moveTo(0, y(0));
    ctx.lineTo(width, y(0));
    ctx.stroke();
  }

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.4;
    ctx.beginPath();
    s.points.forEach((p, i) => {
      if (i === 0) ctx.moveTo(x(p.t), y(p.value));
      else ctx.lineTo(x(p.t), y(p.value));
    });
    ctx.stroke();
  }

  ctx.fillStyle = "#99a";
  ctx.font = "10px sans-serif";
  ctx.fillText(hi.toFixed(3), 4, 12);
  ctx.fillText(lo.toFixed(3), 4, height - 4);
  series.forEach((s, i) => {
    ctx.fillStyle = s.color;
    const value = s.points[s.points.length - 1]?.value;
    ctx.fillText(`${s.label} ${value === undefined ? "" : value.toFixed(3)}`,
                 60 + i * 120, 12);
  });
}
