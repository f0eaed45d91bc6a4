package main

import (
	"fmt"
	"unsafe"

	"example.com/app/internal/clean"
	"example.com/app/internal/conv"
	"example.com/liba"
	"example.com/libb"
	"github.com/BurntSushi/toml"
)

func main() {
	var n int
	size := unsafe.Sizeof(n)
	fmt.Println(size, unsafe.Alignof(n))
	fmt.Println(conv.Bytes("x"), clean.Add(1, 2), liba.Load(nil), libb.Run(), toml.Valid("a"))
}
