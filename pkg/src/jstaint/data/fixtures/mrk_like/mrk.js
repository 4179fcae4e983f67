// mrk: a small inline-markdown to HTML converter
const mrk = (function () {
  function escapeHtml(s) {
    return String(s).split("&").join("&amp;").split("<").join("&lt;").split(">").join("&gt;").split("\"").join("&quot;");
  }

  function factory() {
    const defaultPatterns = {
      link: function (src, i, meta) {
        if (src.charAt(i) !== "[") { return 0; }
        const close = src.indexOf("](", i);
        const end = src.indexOf(")", close);
        if (close < 0 || end < 0) { return 0; }
        meta({ name: "link", text: src.slice(i + 1, close), href: src.slice(close + 2, end) });
        return end + 1;
      },
      image: function (src, i, meta) {
        if (!src.startsWith("![", i)) { return 0; }
        const close = src.indexOf("](", i);
        const end = src.indexOf(")", close);
        if (close < 0 || end < 0) { return 0; }
        meta({ name: "image", alt: src.slice(i + 2, close), src: src.slice(close + 2, end) });
        return end + 1;
      },
      bold: function (src, i, meta) {
        if (!src.startsWith("**", i)) { return 0; }
        const end = src.indexOf("**", i + 2);
        if (end < 0) { return 0; }
        meta({ name: "bold", text: src.slice(i + 2, end) });
        return end + 2;
      },
      italic: function (src, i, meta) {
        if (src.charAt(i) !== "_") { return 0; }
        const end = src.indexOf("_", i + 1);
        if (end < 0) { return 0; }
        meta({ name: "italic", text: src.slice(i + 1, end) });
        return end + 1;
      },
      code: function (src, i, meta) {
        if (src.charAt(i) !== "`") { return 0; }
        const end = src.indexOf("`", i + 1);
        if (end < 0) { return 0; }
        meta({ name: "code", text: src.slice(i + 1, end) });
        return end + 1;
      },
      strike: function (src, i, meta) {
        if (!src.startsWith("~~", i)) { return 0; }
        const end = src.indexOf("~~", i + 2);
        if (end < 0) { return 0; }
        meta({ name: "strike", text: src.slice(i + 2, end) });
        return end + 2;
      },
      heading: function (src, i, meta) {
        if (i !== 0 || !src.startsWith("# ", i)) { return 0; }
        let end = src.indexOf("\n", i);
        if (end < 0) { end = src.length; }
        meta({ name: "heading", text: src.slice(i + 2, end) });
        return end;
      },
      quote: function (src, i, meta) {
        if (i !== 0 || !src.startsWith("> ", i)) { return 0; }
        let end = src.indexOf("\n", i);
        if (end < 0) { end = src.length; }
        meta({ name: "quote", text: src.slice(i + 2, end) });
        return end;
      },
      newline: function (src, i, meta) {
        if (src.charAt(i) !== "\n") { return 0; }
        meta({ name: "newline" });
        return i + 1;
      },
      text: function (src, i, meta) {
        meta({ name: "text", text: src.charAt(i) });
        return i + 1;
      }
    };
    const extraPatterns = {};
    const htmlify = {
      link: token => `<a href="${token.metadata.href}">${escapeHtml(token.metadata.text)}</a>`,
      image: token => `<img src="${escapeHtml(token.metadata.src)}" alt="${escapeHtml(token.metadata.alt)}">`,
      bold: token => `<strong>${escapeHtml(token.metadata.text)}</strong>`,
      italic: token => `<em>${escapeHtml(token.metadata.text)}</em>`,
      code: token => `<code>${escapeHtml(token.metadata.text)}</code>`,
      strike: token => `<del>${escapeHtml(token.metadata.text)}</del>`,
      heading: token => `<h1>${escapeHtml(token.metadata.text)}</h1>`,
      quote: token => `<blockquote>${escapeHtml(token.metadata.text)}</blockquote>`,
      newline: token => "<br>",
      text: token => escapeHtml(token.metadata.text)
    };

    return function mrk(input) {
      const src = String(input);
      const patterns = Object.assign({}, defaultPatterns, extraPatterns);
      const tokens = [];
      let metadata = null;
      let i = 0;
      while (i < src.length) {
        let next = 0;
        for (const fn of Object.values(patterns)) {
          if (next > 0) { break; }
          next = fn(src, i, (m) => { metadata = m; });
          if (next > 0) { tokens.push({ type: "inline", metadata: metadata }); }
        }
        if (next > i) { i = next; } else { i = i + 1; }
      }
      let html = "";
      for (const token of tokens) {
        html += htmlify[token.metadata.name](token);
      }
      return html;
    };
  }

  return factory();
})();

module.exports = mrk;
